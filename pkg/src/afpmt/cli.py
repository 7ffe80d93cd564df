"""Command line entry point: ``afpmt {generate,run,check,report}``.

Exit codes: 0 on success, 1 on configuration errors, 2 when any verdict is
a Fail (disable with ``--no-fail-exit`` or ``"fail_exit": false``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MR_FAIL = 2

log = logging.getLogger("afpmt")


def _gate(config, verdicts, no_fail_exit: bool) -> int:
    from .mr_engine import Outcome

    if config.fail_exit and not no_fail_exit and any(v.outcome is Outcome.FAIL for v in verdicts):
        return EXIT_MR_FAIL
    return EXIT_OK


def cmd_generate(args) -> int:
    from .campaign import write_test_cases
    from .config import config_from_dict, load_config

    if args.config:
        cfg = load_config(args.config)
    else:
        doc = {"out_dir": args.out or "."}
        if args.variants:
            doc["variants"] = args.variants
        if args.fasta:
            doc["canonical_fasta"] = args.fasta
        cfg = config_from_dict(doc, Path.cwd())
    out_dir = Path(args.out).resolve() if args.out else cfg.out_dir
    pairs = cfg.load_pairs()
    where = write_test_cases(pairs, out_dir)
    print(f"wrote {len(pairs)} pairs to {where}")
    return EXIT_OK


def cmd_run(args) -> int:
    from .campaign import run_stage
    from .config import load_config

    cfg = load_config(args.config)
    if args.no_cache:
        cfg.use_cache = False
    results = run_stage(cfg)
    bad = [r for r in results.values() if not r.ok]
    print(f"{len(results)} runs, {len(bad)} without usable output -> {cfg.out_dir / 'runs.json'}")
    return EXIT_OK


def cmd_check(args) -> int:
    from .campaign import check_stage
    from .config import load_config
    from .runner import load_runs

    cfg = load_config(args.config)
    runs = load_runs(cfg.out_dir / "runs.json")
    verdicts = check_stage(cfg, runs)
    counts: dict[str, int] = {}
    for v in verdicts:
        counts[v.outcome.value] = counts.get(v.outcome.value, 0) + 1
    print(" ".join(f"{k}={counts[k]}" for k in sorted(counts)) or "no verdicts")
    return _gate(cfg, verdicts, args.no_fail_exit)


def cmd_report(args) -> int:
    from .campaign import report_stage
    from .config import load_config
    from .report import load_verdicts

    cfg = load_config(args.config)
    if args.anonymize:
        cfg.anonymize = True
    verdicts = load_verdicts(cfg.out_dir / "verdicts.json")
    report_stage(cfg, verdicts)
    print(f"wrote report.json, report.csv, report.md to {cfg.out_dir}")
    return _gate(cfg, verdicts, args.no_fail_exit)


def cmd_mock_predict(args) -> int:
    from .mockbench import load_mock_spec, mock_predict
    from .predictions import write_predictions
    from .sequence import read_fasta

    spec = load_mock_spec(args.base, args.behavior, args.seed)
    preds = [p for rec in read_fasta(args.input_fasta) for p in mock_predict(spec, rec)]
    Path(args.output_file).write_text(write_predictions(preds), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afpmt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{generate,run,check,report}")

    p = sub.add_parser("generate", help="write source/follow-up test cases as FASTA")
    p.add_argument("--config")
    p.add_argument("--variants", help="variant TSV (default: bundled fixture)")
    p.add_argument("--fasta", nargs="+", help="canonical FASTA files (default: bundled fixture)")
    p.add_argument("--out", help="output directory (default: config out_dir)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run or ingest every tool on every test case")
    p.add_argument("--config", required=True)
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_run)

    for name, func, helptext in (("check", cmd_check, "evaluate the metamorphic relation"),
                                 ("report", cmd_report, "aggregate verdicts into reports")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--no-fail-exit", action="store_true", help="exit 0 even if verdicts fail")
        if name == "report":
            p.add_argument("--anonymize", action="store_true", help="relabel tools A, B, C, ...")
        p.set_defaults(func=func)

    # hidden: used by mock adapters to self-exec
    p = sub.add_parser("mock-predict")
    p.add_argument("--behavior", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("input_fasta")
    p.add_argument("output_file")
    p.set_defaults(func=cmd_mock_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    from .config import ConfigError
    from .ontology import OntologyError
    from .predictions import PredictionFormatError
    from .sequence import FastaError
    from .variants import VariantError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OntologyError, FastaError, VariantError, PredictionFormatError, OSError) as exc:
        print(f"afpmt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
