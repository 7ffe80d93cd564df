"""The generate -> run -> check -> report pipeline over a campaign config."""

from __future__ import annotations

import hashlib
import logging
import os
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .config import CampaignConfig
from .mr_engine import DEFAULT_NAMESPACES, DEFAULT_RELATION, MrVerdict, canonical_order, evaluate_pair
from .ontology import Namespace, Ontology
from .predictions import AnnotationSet, DataQualityWarning, Prediction, load_predictions, to_annotation_set
from .report import TestReport, aggregate, anonymize, save_verdicts, write_reports
from .runner import RunResult, ToolAdapter, execute_campaign, safe_name, save_runs
from .sequence import save_fasta
from .variants import TestCasePair

log = logging.getLogger(__name__)

THRESHOLD_NOTE = "predictions at or above the threshold are compared; 0.0 keeps every term"


def write_test_cases(pairs: Sequence[TestCasePair], out_dir: str | Path) -> Path:
    """Write every distinct record as FASTA (one file each plus a combined file) and a pair index."""
    out = Path(out_dir) / "testcases"
    (out / "records").mkdir(parents=True, exist_ok=True)
    records = {}
    for p in pairs:
        records.setdefault(p.source.id, p.source)
        records.setdefault(p.follow_up.id, p.follow_up)
    for rid in sorted(records):
        save_fasta([records[rid]], out / "records" / f"{safe_name(rid)}.fasta")
    save_fasta([records[r] for r in sorted(records)], out / "all.fasta")
    lines = ["pair_id\tprotein_id\tvariant_id\tcategory\tsource_id\tfollow_up_id"]
    for p in pairs:
        lines.append("\t".join([p.pair_id, p.protein_id, p.variant.variant_id,
                                p.variant.category.value, p.source.id, p.follow_up.id]))
    (out / "pairs.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def annotations_for(
    result: RunResult | None, adapter: ToolAdapter, onto: Ontology, threshold: float
) -> AnnotationSet | None:
    """Annotation set of one run, or None if the tool produced no usable output.

    Prediction files hold one record each, so rows are attributed to the
    record regardless of the protein id the tool wrote.
    """
    if result is None or not result.ok:
        return None
    preds = load_predictions(result.prediction_path, adapter.prediction_format)
    relabeled = [Prediction(result.record_id, p.term, p.score) for p in preds]
    return to_annotation_set(relabeled, onto, result.record_id, threshold)


def check(
    pairs: Sequence[TestCasePair],
    runs: Mapping[tuple[str, str], RunResult],
    adapters: Sequence[ToolAdapter],
    onto: Ontology,
    threshold: float = 0.0,
    namespaces: Iterable[Namespace] = DEFAULT_NAMESPACES,
    relation: str = DEFAULT_RELATION,
) -> list[MrVerdict]:
    namespaces = tuple(namespaces)
    verdicts = []
    for adapter in adapters:
        cache: dict[str, AnnotationSet | None] = {}

        def annots(record_id: str) -> AnnotationSet | None:
            if record_id not in cache:
                cache[record_id] = annotations_for(runs.get((adapter.tool_id, record_id)), adapter, onto, threshold)
            return cache[record_id]

        for pair in pairs:
            verdicts += evaluate_pair(pair, adapter.tool_id, annots(pair.source.id),
                                      annots(pair.follow_up.id), namespaces, relation)
    return canonical_order(verdicts)


def report_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


def report_metadata(config: CampaignConfig, onto: Ontology, timestamp: str | None = None) -> dict:
    return {
        "ontology_checksum": hashlib.sha256(config.ontology.read_bytes()).hexdigest(),
        "ontology_file": config.ontology.name,
        "synthetic_terms": config.synthetic_terms or config.uses_mocks,
        "threshold": config.threshold,
        "threshold_note": THRESHOLD_NOTE,
        "namespaces": [n.short for n in config.namespaces],
        "relation": config.relation,
        "timestamp": timestamp if timestamp is not None else report_timestamp(),
    }


def run_stage(config: CampaignConfig, pairs: Sequence[TestCasePair] | None = None) -> dict:
    pairs = config.load_pairs() if pairs is None else pairs
    config.out_dir.mkdir(parents=True, exist_ok=True)
    results = execute_campaign(pairs, config.adapters(), config.out_dir,
                               max_workers=config.max_workers, use_cache=config.use_cache)
    save_runs(results, config.out_dir / "runs.json")
    return results


def check_stage(config: CampaignConfig, runs: Mapping, pairs: Sequence[TestCasePair] | None = None,
                onto: Ontology | None = None) -> list[MrVerdict]:
    pairs = config.load_pairs() if pairs is None else pairs
    onto = config.load_ontology() if onto is None else onto
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DataQualityWarning)
        verdicts = check(pairs, runs, config.adapters(), onto, config.threshold,
                         config.namespaces, config.relation)
    for w in caught:
        log.warning("%s", w.message)
    save_verdicts(verdicts, config.out_dir / "verdicts.json")
    return verdicts


def report_stage(config: CampaignConfig, verdicts: Sequence[MrVerdict],
                 pairs: Sequence[TestCasePair] | None = None, onto: Ontology | None = None,
                 timestamp: str | None = None) -> TestReport:
    pairs = config.load_pairs() if pairs is None else pairs
    onto = config.load_ontology() if onto is None else onto
    report = aggregate(verdicts, pairs, report_metadata(config, onto, timestamp))
    if config.anonymize:
        report = anonymize(report, [t.id for t in config.tools])
    write_reports(report, config.out_dir)
    return report


def run_campaign(config: CampaignConfig, timestamp: str | None = None) -> TestReport:
    """All four stages in one call."""
    pairs = config.load_pairs()
    onto = config.load_ontology()
    write_test_cases(pairs, config.out_dir)
    runs = run_stage(config, pairs)
    verdicts = check_stage(config, runs, pairs, onto)
    return report_stage(config, verdicts, pairs, onto, timestamp)
