"""Metamorphic relation checks over source/follow-up GO term sets."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import AbstractSet, Callable, Iterable

from .ontology import Namespace, Ontology, UnknownTermError
from .predictions import AnnotationSet, DataQualityWarning
from .variants import TestCasePair

DEFAULT_NAMESPACES = (Namespace.MOLECULAR_FUNCTION, Namespace.BIOLOGICAL_PROCESS)

MISSING_OUTPUT = "missing-output"
EMPTY_BOTH = "empty-both"


class Outcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, order=True)
class MrVerdict:
    pair_id: str
    tool_id: str
    namespace: Namespace
    outcome: Outcome
    reason: str = ""

    def __post_init__(self) -> None:
        if self.outcome is Outcome.INCONCLUSIVE and not self.reason:
            raise ValueError("inconclusive verdicts need a reason")

    @property
    def key(self) -> tuple[str, str, Namespace]:
        return (self.pair_id, self.tool_id, self.namespace)


def check_mr_change(source_terms: AbstractSet[str], follow_up_terms: AbstractSet[str]) -> Outcome:
    """Pass iff the follow-up output differs from the source output as a set.

    Terms match only themselves; a parent and its child are different terms.
    """
    return Outcome.PASS if set(source_terms) != set(follow_up_terms) else Outcome.FAIL


MrCheck = Callable[[AbstractSet[str], AbstractSet[str]], Outcome]

RELATIONS: dict[str, MrCheck] = {"mr-variant-change": check_mr_change}
DEFAULT_RELATION = "mr-variant-change"


def register_relation(name: str, check: MrCheck) -> None:
    if name in RELATIONS:
        raise ValueError(f"relation {name!r} already registered")
    RELATIONS[name] = check


def evaluate_pair(
    pair: TestCasePair,
    tool_id: str,
    source_annotations: AnnotationSet | None,
    follow_up_annotations: AnnotationSet | None,
    namespaces: Iterable[Namespace | str] = DEFAULT_NAMESPACES,
    relation: str = DEFAULT_RELATION,
) -> list[MrVerdict]:
    """One verdict per namespace; ``None`` annotations mean the tool produced no output."""
    check = RELATIONS[relation]
    nss = sorted({Namespace.parse(n) for n in namespaces})
    verdicts = []
    for ns in nss:
        if source_annotations is None or follow_up_annotations is None:
            v = MrVerdict(pair.pair_id, tool_id, ns, Outcome.INCONCLUSIVE, MISSING_OUTPUT)
        else:
            src, fu = source_annotations[ns], follow_up_annotations[ns]
            if not src and not fu:
                v = MrVerdict(pair.pair_id, tool_id, ns, Outcome.INCONCLUSIVE, EMPTY_BOTH)
            else:
                v = MrVerdict(pair.pair_id, tool_id, ns, check(src, fu))
        verdicts.append(v)
    return verdicts


def canonical_order(verdicts: Iterable[MrVerdict]) -> list[MrVerdict]:
    return sorted(verdicts, key=lambda v: v.key)


class Hierarchy(str, Enum):
    IS_ANCESTOR = "is_ancestor"  # added term is an ancestor of the removed one
    IS_DESCENDANT = "is_descendant"  # added term is a descendant of the removed one


@dataclass(frozen=True)
class Difference:
    added: frozenset[str]
    removed: frozenset[str]
    hierarchical_note: frozenset[tuple[str, str, Hierarchy]]


def diagnostic_difference(
    source_terms: AbstractSet[str], follow_up_terms: AbstractSet[str], onto: Ontology
) -> Difference:
    """Describe how the output changed, flagging removed/added pairs related by ancestry.

    For inspection only: verdicts never depend on this.
    """
    added = frozenset(follow_up_terms) - frozenset(source_terms)
    removed = frozenset(source_terms) - frozenset(follow_up_terms)
    known = {}
    for t in sorted(added | removed):
        try:
            known[t] = onto.resolve(t)
        except UnknownTermError:
            warnings.warn(f"unknown GO term {t} excluded from diagnostics", DataQualityWarning, stacklevel=2)
    notes = set()
    for r in removed:
        if r not in known:
            continue
        r_anc = onto.ancestors(known[r])
        for a in added:
            if a not in known:
                continue
            if known[a] in r_anc:
                notes.add((r, a, Hierarchy.IS_ANCESTOR))
            elif known[r] in onto.ancestors(known[a]):
                notes.add((r, a, Hierarchy.IS_DESCENDANT))
    return Difference(added, removed, frozenset(notes))
