"""Deterministic mock AFP predictors for exercising the harness end to end.

Four behaviours:

* ``variant-blind`` returns the canonical protein's annotations for any
  sequence, like a tool that only looks up the closest known protein.
* ``variant-aware`` adds, per namespace, one synthetic term derived from a
  hash of the full sequence, so any sequence change changes the output.
* ``ancestor-shift`` swaps every term for its nearest ancestor whenever the
  sequence differs from the canonical one.
* ``empty`` predicts nothing.

Synthetic terms live in the reserved range GO:0990000-GO:0998999, which
:func:`synthetic_overlay` registers on top of a real ontology.
"""

from __future__ import annotations

import hashlib
import json
import shlex
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .ontology import Namespace, Ontology, Relation, Term, load_obo
from .predictions import Prediction, PredictionFormat
from .runner import InProcessMode, SubprocessMode, ToolAdapter
from .sequence import ProteinRecord, read_fasta
from .variants import canonical_id_of

SYNTHETIC_SLOTS = 3000
SYNTHETIC_BASE = {
    Namespace.MOLECULAR_FUNCTION: 990000,
    Namespace.BIOLOGICAL_PROCESS: 993000,
    Namespace.CELLULAR_COMPONENT: 996000,
}
NAMESPACE_ROOTS = {
    Namespace.MOLECULAR_FUNCTION: "GO:0003674",
    Namespace.BIOLOGICAL_PROCESS: "GO:0008150",
    Namespace.CELLULAR_COMPONENT: "GO:0005575",
}

MOCK_ENV_ALLOW = ("PATH", "PYTHONPATH", "SYSTEMROOT")


class MockError(ValueError):
    pass


class Behavior(str, Enum):
    VARIANT_BLIND = "variant-blind"
    VARIANT_AWARE = "variant-aware"
    ANCESTOR_SHIFT = "ancestor-shift"
    EMPTY = "empty"


@dataclass
class MockSpec:
    behavior: Behavior
    base_annotations: Mapping[str, Iterable[str]] = field(default_factory=dict)
    seed: int = 0
    ontology: Ontology | None = None
    canonical_sequences: Mapping[str, str] = field(default_factory=dict)
    base_path: Path | None = None

    def __post_init__(self) -> None:
        self.behavior = Behavior(self.behavior)
        self.base_annotations = {k: tuple(sorted(set(v))) for k, v in self.base_annotations.items()}
        if self.behavior is not Behavior.EMPTY:
            if not self.base_annotations or not all(self.base_annotations.values()):
                raise MockError(f"{self.behavior.value} mock needs non-empty base annotations")
        if self.behavior in (Behavior.VARIANT_AWARE, Behavior.ANCESTOR_SHIFT) and self.ontology is None:
            raise MockError(f"{self.behavior.value} mock needs an ontology")
        if self.behavior is Behavior.ANCESTOR_SHIFT:
            missing = sorted(set(self.base_annotations) - set(self.canonical_sequences))
            if missing:
                raise MockError(f"ancestor-shift mock lacks canonical sequences for {missing}")


def synthetic_term_id(namespace: Namespace, sequence: str, seed: int = 0) -> str:
    h = hashlib.sha256(f"{seed}:{namespace.value}:{sequence}".encode("ascii")).digest()
    slot = int.from_bytes(h[:8], "big") % SYNTHETIC_SLOTS
    return f"GO:{SYNTHETIC_BASE[namespace] + slot:07d}"


def synthetic_overlay(onto: Ontology) -> Ontology:
    """``onto`` plus every reserved synthetic term, filed under its namespace root."""
    extra = []
    parents = {}
    for ns, base in SYNTHETIC_BASE.items():
        root = NAMESPACE_ROOTS[ns]
        for slot in range(SYNTHETIC_SLOTS):
            tid = f"GO:{base + slot:07d}"
            extra.append(Term(tid, f"synthetic {ns.short} term {slot}", ns))
            if root in onto.terms:
                parents[tid] = root
    return onto.with_terms(extra, parents)


def _nearest_ancestor(onto: Ontology, term: str) -> str:
    live = [(rel is not Relation.IS_A, p) for p, rel in onto.parents(term) if not onto.terms[p].obsolete]
    return min(live)[1] if live else onto.resolve(term)


def mock_predict(spec: MockSpec, record: ProteinRecord) -> list[Prediction]:
    if spec.behavior is Behavior.EMPTY:
        return []
    cid = canonical_id_of(record.id)
    base = spec.base_annotations.get(cid)
    if base is None:
        raise MockError(f"no base annotations for canonical id {cid}")

    terms = set(base)
    if spec.behavior is Behavior.VARIANT_AWARE:
        for ns in sorted({spec.ontology.namespace_of(t) for t in base}):
            terms.add(synthetic_term_id(ns, record.sequence, spec.seed))
    elif spec.behavior is Behavior.ANCESTOR_SHIFT:
        if record.sequence != spec.canonical_sequences[cid]:
            terms = {_nearest_ancestor(spec.ontology, t) for t in base}
    return [Prediction(record.id, t, 1.0) for t in sorted(terms)]


def synthetic_collisions(spec: MockSpec, records: Iterable[ProteinRecord]) -> list[tuple[str, str]]:
    """Pairs of distinct same-canonical sequences that would get the same synthetic terms."""
    groups: dict[tuple[str, str], list[ProteinRecord]] = {}
    for r in records:
        key = tuple(synthetic_term_id(ns, r.sequence, spec.seed) for ns in Namespace)
        groups.setdefault((canonical_id_of(r.id), key), []).append(r)
    out = []
    for recs in groups.values():
        seqs = {}
        for r in recs:
            seqs.setdefault(r.sequence, r.id)
        ids = sorted(seqs.values())
        out += [(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]
    return out


# -- base annotation files ----------------------------------------------------


def load_mock_spec(base_path: str | Path, behavior: Behavior | str, seed: int = 0) -> MockSpec:
    """Load a mock from a JSON base file.

    The file holds ``annotations`` (canonical id -> GO ids) and optionally
    ``ontology`` (OBO path) and ``canonical_fasta`` (FASTA paths), all
    relative to the file itself.
    """
    base_path = Path(base_path).resolve()
    doc = json.loads(base_path.read_text(encoding="utf-8"))
    onto = load_obo(base_path.parent / doc["ontology"]) if doc.get("ontology") else None
    seqs = {}
    for f in doc.get("canonical_fasta", []):
        for rec in read_fasta(base_path.parent / f):
            seqs[rec.id] = rec.sequence
    return MockSpec(
        behavior=Behavior(behavior),
        base_annotations=doc.get("annotations", {}),
        seed=seed,
        ontology=onto,
        canonical_sequences=seqs,
        base_path=base_path,
    )


def mock_as_adapter(spec: MockSpec, tool_id: str | None = None, in_process: bool = False,
                    timeout: float = 60.0) -> ToolAdapter:
    """Wrap a mock as a tool adapter.

    By default the adapter re-executes this package's CLI through its hidden
    ``mock-predict`` subcommand, so the subprocess path of the runner is the
    one being exercised. ``in_process`` (or a spec not loaded from a file)
    calls :func:`mock_predict` directly.
    """
    tool_id = tool_id or f"mock-{spec.behavior.value}"
    if in_process or spec.base_path is None:
        return ToolAdapter(tool_id, InProcessMode(lambda rec: mock_predict(spec, rec)),
                           PredictionFormat.PLAIN_TSV)
    cmd = " ".join([
        shlex.quote(sys.executable), "-m", "afpmt", "mock-predict",
        "--behavior", spec.behavior.value,
        "--base", shlex.quote(str(spec.base_path)),
        "--seed", str(spec.seed),
        "{input_fasta}", "{output_file}",
    ])
    return ToolAdapter(tool_id, SubprocessMode(cmd, timeout=timeout, env_allow=MOCK_ENV_ALLOW),
                       PredictionFormat.PLAIN_TSV)
