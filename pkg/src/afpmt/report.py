"""Aggregation of MR verdicts into per-tool, per-protein and per-variant views."""

from __future__ import annotations

import csv
import io
import json
import string
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .mr_engine import MrVerdict, Outcome, canonical_order
from .ontology import Namespace
from .variants import TestCasePair

SCHEMA = "afpmt.report/1"


class ReportError(ValueError):
    pass


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "md"


@dataclass(frozen=True)
class Counts:
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.inconclusive

    def add(self, outcome: Outcome) -> Counts:
        if outcome is Outcome.PASS:
            return replace(self, passed=self.passed + 1)
        if outcome is Outcome.FAIL:
            return replace(self, failed=self.failed + 1)
        return replace(self, inconclusive=self.inconclusive + 1)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.passed, self.failed, self.inconclusive)


def percentage(passed: int, failed: int) -> float | None:
    """100 * pass / (pass + fail), one decimal, round-half-up; None when undefined."""
    decided = passed + failed
    if decided == 0:
        return None
    pct = (Decimal(100 * passed) / Decimal(decided)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return float(pct)


@dataclass(frozen=True)
class PairInfo:
    protein_id: str
    variant_id: str


@dataclass
class TestReport:
    metadata: dict = field(default_factory=dict)
    verdicts: list[MrVerdict] = field(default_factory=list)
    pairs: dict[str, PairInfo] = field(default_factory=dict)
    tool_totals: dict[tuple[str, Namespace], Counts] = field(default_factory=dict)
    protein_totals: dict[tuple[str, str, Namespace], Counts] = field(default_factory=dict)
    variant_totals: dict[tuple[str, Namespace], Counts] = field(default_factory=dict)

    __test__ = False

    @property
    def variant_pass_pct(self) -> dict[tuple[str, Namespace], float | None]:
        return {k: percentage(c.passed, c.failed) for k, c in self.variant_totals.items()}

    @property
    def tools(self) -> list[str]:
        return sorted({t for t, _ in self.tool_totals})

    @property
    def namespaces(self) -> list[Namespace]:
        return sorted({ns for _, ns in self.tool_totals})

    def has_failures(self) -> bool:
        return any(v.outcome is Outcome.FAIL for v in self.verdicts)


def aggregate(
    verdicts: Iterable[MrVerdict],
    pairs: Sequence[TestCasePair] | Mapping[str, PairInfo],
    metadata: Mapping | None = None,
) -> TestReport:
    """Tally verdicts; the result is independent of the order of ``verdicts``."""
    if isinstance(pairs, Mapping):
        info = dict(pairs)
    else:
        info = {p.pair_id: PairInfo(p.protein_id, p.variant.variant_id) for p in pairs}
    ordered = canonical_order(verdicts)
    seen = set()
    tool_totals: dict = {}
    protein_totals: dict = {}
    variant_totals: dict = {}
    for v in ordered:
        if v.key in seen:
            raise ReportError(f"duplicate verdict for {v.key}")
        seen.add(v.key)
        pi = info.get(v.pair_id)
        if pi is None:
            raise ReportError(f"verdict refers to unknown pair {v.pair_id}")
        for table, key in (
            (tool_totals, (v.tool_id, v.namespace)),
            (protein_totals, (v.tool_id, pi.protein_id, v.namespace)),
            (variant_totals, (pi.variant_id, v.namespace)),
        ):
            table[key] = table.get(key, Counts()).add(v.outcome)
    used = {v.pair_id for v in ordered}
    return TestReport(
        metadata=dict(metadata or {}),
        verdicts=ordered,
        pairs={k: info[k] for k in sorted(used)},
        tool_totals=dict(sorted(tool_totals.items())),
        protein_totals=dict(sorted(protein_totals.items())),
        variant_totals=dict(sorted(variant_totals.items())),
    )


def pass_percentage(report: TestReport, variant_id: str, namespace: Namespace | str) -> float | None:
    ns = Namespace.parse(namespace)
    if not any(p.variant_id == variant_id for p in report.pairs.values()):
        raise ReportError(f"unknown variant {variant_id}")
    c = report.variant_totals.get((variant_id, ns), Counts())
    return percentage(c.passed, c.failed)


def anonymize(report: TestReport, tool_order: Sequence[str]) -> TestReport:
    """Relabel tools A, B, C, ... following ``tool_order``."""
    labels = {}
    for t in tool_order:
        if t not in labels:
            labels[t] = _label(len(labels))
    for t in report.tools:
        if t not in labels:
            labels[t] = _label(len(labels))
    verdicts = [replace(v, tool_id=labels[v.tool_id]) for v in report.verdicts]
    return aggregate(verdicts, report.pairs, report.metadata)


def _label(i: int) -> str:
    letters = string.ascii_uppercase
    out = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        out = letters[r] + out
    return out


def fmt_pct(p: float | None) -> str:
    return "n/a" if p is None else f"{p:.1f}"


# -- serialization ------------------------------------------------------------


def to_json_dict(report: TestReport) -> dict:
    return {
        "schema": SCHEMA,
        "metadata": report.metadata,
        "pairs": [
            {"pair_id": k, "protein_id": p.protein_id, "variant_id": p.variant_id}
            for k, p in report.pairs.items()
        ],
        "verdicts": [
            {"pair_id": v.pair_id, "tool_id": v.tool_id, "namespace": v.namespace.value,
             "outcome": v.outcome.value, "reason": v.reason}
            for v in report.verdicts
        ],
        "tool_totals": [
            {"tool_id": t, "namespace": ns.value, **_counts_dict(c)}
            for (t, ns), c in report.tool_totals.items()
        ],
        "protein_totals": [
            {"tool_id": t, "protein_id": p, "namespace": ns.value, **_counts_dict(c)}
            for (t, p, ns), c in report.protein_totals.items()
        ],
        "variant_totals": [
            {"variant_id": vid, "namespace": ns.value, **_counts_dict(c),
             "pass_pct": percentage(c.passed, c.failed)}
            for (vid, ns), c in report.variant_totals.items()
        ],
    }


def _counts_dict(c: Counts) -> dict:
    return {"pass": c.passed, "fail": c.failed, "inconclusive": c.inconclusive}


def parse_report_json(data: bytes | str) -> TestReport:
    """Rebuild a report from its JSON form; totals are re-derived and cross-checked."""
    doc = json.loads(data)
    if doc.get("schema") != SCHEMA:
        raise ReportError(f"unsupported report schema {doc.get('schema')!r}")
    pairs = {p["pair_id"]: PairInfo(p["protein_id"], p["variant_id"]) for p in doc["pairs"]}
    verdicts = [
        MrVerdict(v["pair_id"], v["tool_id"], Namespace(v["namespace"]), Outcome(v["outcome"]), v["reason"])
        for v in doc["verdicts"]
    ]
    report = aggregate(verdicts, pairs, doc["metadata"])
    if to_json_dict(report) != doc:
        raise ReportError("report totals are inconsistent with its verdicts")
    return report


def emit(report: TestReport, fmt: ReportFormat | str) -> bytes:
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        text = json.dumps(to_json_dict(report), indent=2, sort_keys=True) + "\n"
    elif fmt is ReportFormat.CSV:
        text = _emit_csv(report)
    else:
        text = _emit_markdown(report)
    return text.encode("utf-8")


CSV_COLUMNS = ("table", "tool_id", "protein_id", "variant_id", "pair_id", "namespace",
               "outcome", "reason", "pass", "fail", "inconclusive", "pass_pct")


def _emit_csv(report: TestReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n", restval="")
    w.writeheader()
    for v in report.verdicts:
        pi = report.pairs[v.pair_id]
        w.writerow({"table": "verdict", "tool_id": v.tool_id, "protein_id": pi.protein_id,
                    "variant_id": pi.variant_id, "pair_id": v.pair_id,
                    "namespace": v.namespace.short, "outcome": v.outcome.value, "reason": v.reason})
    for (t, ns), c in report.tool_totals.items():
        w.writerow({"table": "tool_total", "tool_id": t, "namespace": ns.short, **_counts_dict(c),
                    "pass_pct": fmt_pct(percentage(c.passed, c.failed))})
    for (t, p, ns), c in report.protein_totals.items():
        w.writerow({"table": "protein_total", "tool_id": t, "protein_id": p, "namespace": ns.short,
                    **_counts_dict(c), "pass_pct": fmt_pct(percentage(c.passed, c.failed))})
    for (vid, ns), c in report.variant_totals.items():
        w.writerow({"table": "variant_total", "variant_id": vid, "namespace": ns.short,
                    **_counts_dict(c), "pass_pct": fmt_pct(percentage(c.passed, c.failed))})
    return buf.getvalue()


def _md_table(header: Sequence[str], rows: Iterable[Sequence[object]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _emit_markdown(report: TestReport) -> str:
    md = report.metadata
    out = ["# Metamorphic test report", ""]
    for key in sorted(md):
        out.append(f"- **{key}**: {md[key]}")
    if md:
        out.append("")
    if not report.verdicts:
        out += ["No verdicts.", ""]
        return "\n".join(out)

    out += ["## Results per tool", ""]
    for ns in report.namespaces:
        rows = []
        for t in report.tools:
            c = report.tool_totals.get((t, ns))
            if c is not None:
                rows.append((t, c.passed, c.failed, c.inconclusive, c.total))
        out += [f"### {ns.value.replace('_', ' ').title()} ({ns.short})", ""]
        out += _md_table(("Tool", "Pass", "Fail", "Inconclusive", "Pairs"), rows) + [""]

    out += ["## Results per protein", ""]
    rows = [(t, p, ns.short, c.passed, c.failed, c.inconclusive)
            for (t, p, ns), c in report.protein_totals.items()]
    out += _md_table(("Tool", "Protein", "Ontology", "Pass", "Fail", "Inconclusive"), rows) + [""]

    out += ["## Pass percentage per variant", "",
            "Share of tools whose output changed between the canonical and the variant "
            "sequence. Inconclusive results are excluded.", ""]
    nss = report.namespaces
    by_variant: dict[str, str] = {}
    for p in report.pairs.values():
        by_variant.setdefault(p.variant_id, p.protein_id)
    rows = []
    for vid in sorted(by_variant, key=lambda v: (by_variant[v], v)):
        rows.append([vid, by_variant[vid]] + [fmt_pct(report.variant_pass_pct.get((vid, ns))) for ns in nss])
    out += _md_table(["Variant", "Protein"] + [f"{ns.short} %" for ns in nss], rows) + [""]
    return "\n".join(out)


def write_reports(report: TestReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in ReportFormat:
        p = out_dir / f"report.{fmt.value}"
        p.write_bytes(emit(report, fmt))
        paths.append(p)
    return paths


def save_verdicts(verdicts: Iterable[MrVerdict], path: str | Path) -> Path:
    path = Path(path)
    rows = [{"pair_id": v.pair_id, "tool_id": v.tool_id, "namespace": v.namespace.value,
             "outcome": v.outcome.value, "reason": v.reason} for v in canonical_order(verdicts)]
    path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    return path


def load_verdicts(path: str | Path) -> list[MrVerdict]:
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    return [MrVerdict(r["pair_id"], r["tool_id"], Namespace(r["namespace"]), Outcome(r["outcome"]), r["reason"])
            for r in rows]
