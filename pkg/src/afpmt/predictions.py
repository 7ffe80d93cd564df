"""Parsing AFP tool output into namespace-split annotation sets."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, TextIO

from .ontology import GO_ID_RE, Namespace, Ontology, UnknownTermError


class PredictionFormatError(ValueError):
    pass


class DataQualityWarning(UserWarning):
    """Recoverable problems in tool output: duplicates, unknown or obsolete terms."""


class PredictionFormat(str, Enum):
    PLAIN_TSV = "plain"
    CAFA = "cafa"

    @classmethod
    def parse(cls, value: str | PredictionFormat) -> PredictionFormat:
        if isinstance(value, PredictionFormat):
            return value
        v = value.strip().lower()
        aliases = {"plain": cls.PLAIN_TSV, "tsv": cls.PLAIN_TSV, "plaintsv": cls.PLAIN_TSV,
                   "cafa": cls.CAFA, "cafasubmission": cls.CAFA}
        try:
            return aliases[v]
        except KeyError:
            raise PredictionFormatError(f"unknown prediction format {value!r}") from None


_CAFA_HEADERS = ("AUTHOR", "MODEL", "KEYWORDS", "ACCURACY")


@dataclass(frozen=True, order=True)
class Prediction:
    protein_id: str
    term: str
    score: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise PredictionFormatError(f"score {self.score} outside [0, 1]")


@dataclass
class AnnotationSet:
    protein_id: str
    terms_by_namespace: dict[Namespace, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for ns in Namespace:
            self.terms_by_namespace.setdefault(ns, frozenset())

    def __getitem__(self, ns: Namespace | str) -> frozenset[str]:
        return self.terms_by_namespace[Namespace.parse(ns)]

    def all_terms(self) -> frozenset[str]:
        return frozenset().union(*self.terms_by_namespace.values())


def parse_predictions(
    source: str | TextIO, fmt: PredictionFormat | str = PredictionFormat.PLAIN_TSV
) -> list[Prediction]:
    """Parse prediction lines; duplicate (protein, term) rows keep the highest score."""
    fmt = PredictionFormat.parse(fmt)
    text = source if isinstance(source, str) else source.read()
    best: dict[tuple[str, str], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if fmt is PredictionFormat.CAFA:
            head = line.split(None, 1)[0]
            if head in _CAFA_HEADERS:
                continue
            if head == "END":
                break
            fields = line.split()
        else:
            fields = [f.strip() for f in raw.rstrip("\r\n").split("\t")]
        if len(fields) not in (2, 3):
            raise PredictionFormatError(f"line {lineno}: expected 2 or 3 fields, got {len(fields)}")
        protein_id, term = fields[0], fields[1]
        if not GO_ID_RE.match(term):
            raise PredictionFormatError(f"line {lineno}: malformed GO id {term!r}")
        try:
            score = float(fields[2]) if len(fields) == 3 and fields[2] else 1.0
        except ValueError:
            raise PredictionFormatError(f"line {lineno}: bad score {fields[2]!r}") from None
        if not 0.0 <= score <= 1.0:
            raise PredictionFormatError(f"line {lineno}: score {score} outside [0, 1]")
        key = (protein_id, term)
        if key in best:
            warnings.warn(
                f"line {lineno}: duplicate prediction {protein_id} {term}; keeping max score",
                DataQualityWarning,
                stacklevel=2,
            )
            score = max(score, best[key])
        best[key] = score
    return sorted(Prediction(p, t, s) for (p, t), s in best.items())


def load_predictions(path: str | Path, fmt: PredictionFormat | str = PredictionFormat.PLAIN_TSV) -> list[Prediction]:
    with open(path, encoding="utf-8") as fh:
        return parse_predictions(fh, fmt)


def write_predictions(preds: Iterable[Prediction]) -> str:
    """Plain TSV rendering; scores use ``repr`` so they parse back exactly."""
    return "".join(f"{p.protein_id}\t{p.term}\t{p.score!r}\n" for p in sorted(preds))


def to_annotation_set(
    preds: Iterable[Prediction],
    onto: Ontology,
    protein_id: str,
    threshold: float = 0.0,
) -> AnnotationSet:
    """File the predictions for ``protein_id`` scoring >= ``threshold`` under their namespace.

    Alternative ids are resolved to primary ids. Unknown and obsolete terms
    are dropped with a :class:`DataQualityWarning`.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    buckets: dict[Namespace, set[str]] = {ns: set() for ns in Namespace}
    for p in preds:
        if p.protein_id != protein_id or p.score < threshold:
            continue
        try:
            tid = onto.resolve(p.term)
        except UnknownTermError:
            warnings.warn(f"{protein_id}: unknown GO term {p.term} dropped", DataQualityWarning, stacklevel=2)
            continue
        term = onto.terms[tid]
        if term.obsolete:
            warnings.warn(f"{protein_id}: obsolete GO term {p.term} dropped", DataQualityWarning, stacklevel=2)
            continue
        buckets[term.namespace].add(tid)
    return AnnotationSet(protein_id, {ns: frozenset(s) for ns, s in buckets.items()})


def read_manifest(path: str | Path) -> dict[str, Path]:
    """Read a ``record_id<TAB>path`` manifest; relative paths resolve against its directory."""
    path = Path(path)
    out: dict[str, Path] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) != 2:
            raise PredictionFormatError(f"{path}:{lineno}: expected record_id<TAB>path")
        rid, target = fields[0].strip(), fields[1].strip()
        if lineno == 1 and (rid, target) == ("record_id", "path"):
            continue
        if rid in out:
            raise PredictionFormatError(f"{path}:{lineno}: duplicate record id {rid}")
        out[rid] = (path.parent / target).resolve()
    return out


def write_manifest(entries: dict[str, str | Path], path: str | Path) -> Path:
    path = Path(path)
    lines = ["record_id\tpath"] + [f"{rid}\t{entries[rid]}" for rid in sorted(entries)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
