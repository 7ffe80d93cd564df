"""Gene Ontology term graph: OBO parsing, namespaces and ancestor queries."""

from __future__ import annotations

import hashlib
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, TextIO

GO_ID_RE = re.compile(r"^GO:\d{7}$")


class OntologyError(ValueError):
    pass


class UnknownTermError(OntologyError, KeyError):
    def __init__(self, term: str):
        self.term = term
        super().__init__(f"unknown GO term {term}")

    def __str__(self) -> str:
        return self.args[0]


class Namespace(str, Enum):
    MOLECULAR_FUNCTION = "molecular_function"
    BIOLOGICAL_PROCESS = "biological_process"
    CELLULAR_COMPONENT = "cellular_component"

    @property
    def short(self) -> str:
        return _SHORT[self]

    # MF, BP, CC order everywhere, rather than alphabetical
    def __lt__(self, other):
        if isinstance(other, Namespace):
            return _RANK[self] < _RANK[other]
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, Namespace):
            return _RANK[self] > _RANK[other]
        return NotImplemented

    def __le__(self, other):
        return self == other or self < other

    def __ge__(self, other):
        return self == other or self > other

    __hash__ = str.__hash__

    @classmethod
    def parse(cls, value: str | Namespace) -> Namespace:
        """Accept OBO names (``molecular_function``), short codes (``MF``) or aspects (``F``)."""
        if isinstance(value, Namespace):
            return value
        key = value.strip()
        for ns in cls:
            if key in (ns.value, ns.short, ns.short[1]) or key.upper() == ns.short:
                return ns
        raise OntologyError(f"unknown namespace {value!r}")


_SHORT = {
    Namespace.MOLECULAR_FUNCTION: "MF",
    Namespace.BIOLOGICAL_PROCESS: "BP",
    Namespace.CELLULAR_COMPONENT: "CC",
}
_RANK = {ns: i for i, ns in enumerate(Namespace)}


class Relation(str, Enum):
    IS_A = "is_a"
    PART_OF = "part_of"


def is_go_id(value: str) -> bool:
    return bool(GO_ID_RE.match(value))


def check_go_id(value: str) -> str:
    value = value.strip()
    if not GO_ID_RE.match(value):
        raise OntologyError(f"malformed GO id {value!r}")
    return value


@dataclass(frozen=True)
class Term:
    id: str
    name: str
    namespace: Namespace
    obsolete: bool = False
    alt_ids: frozenset[str] = frozenset()


@dataclass
class Ontology:
    """Immutable-by-convention GO graph.

    ``edges`` maps a child id to its (parent, relation) pairs. Only ``is_a``
    and ``part_of`` edges are kept; both count equally for ancestry.
    """

    terms: Mapping[str, Term]
    edges: Mapping[str, frozenset[tuple[str, Relation]]]
    checksum: str = ""
    _alt_index: dict[str, str] = field(default_factory=dict, repr=False, compare=False)
    _anc_cache: dict[str, frozenset[str]] = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self) -> None:
        alt: dict[str, str] = {}
        for t in self.terms.values():
            for a in t.alt_ids:
                if a in self.terms:
                    raise OntologyError(f"alt_id {a} of {t.id} is also a primary id")
                if a in alt and alt[a] != t.id:
                    raise OntologyError(f"alt_id {a} claimed by {alt[a]} and {t.id}")
                alt[a] = t.id
        self._alt_index = alt
        dangling = sorted(
            f"{child}->{parent}"
            for child, parents in self.edges.items()
            for parent, _ in parents
            if child not in self.terms or parent not in self.terms
        )
        if dangling:
            raise OntologyError(f"dangling edge references: {', '.join(dangling)}")
        cycle = _find_cycle(
            (t for t, v in self.terms.items() if not v.obsolete), self._live_parents
        )
        if cycle:
            raise OntologyError(f"cycle detected: {' -> '.join(cycle)}")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: object) -> bool:
        return isinstance(term, str) and (term in self.terms or term in self._alt_index)

    def resolve(self, term: str) -> str:
        """Map a primary or alternative id to its primary id."""
        if term in self.terms:
            return term
        try:
            return self._alt_index[term]
        except KeyError:
            raise UnknownTermError(term) from None

    def term(self, term: str) -> Term:
        return self.terms[self.resolve(term)]

    def is_obsolete(self, term: str) -> bool:
        return self.term(term).obsolete

    def parents(self, term: str) -> list[tuple[str, Relation]]:
        return sorted(self.edges.get(self.resolve(term), ()))

    def _live_parents(self, term: str) -> Iterable[str]:
        for parent, _ in self.edges.get(term, ()):
            if not self.terms[parent].obsolete:
                yield parent

    def ancestors(self, term: str) -> frozenset[str]:
        """All non-obsolete terms reachable over is_a/part_of edges, excluding ``term``."""
        tid = self.resolve(term)
        cached = self._anc_cache.get(tid)
        if cached is not None:
            return cached
        seen: set[str] = set()
        stack = list(self._live_parents(tid))
        while stack:
            p = stack.pop()
            if p in seen:
                continue
            seen.add(p)
            stack.extend(self._live_parents(p))
        result = frozenset(seen)
        with self._lock:
            self._anc_cache[tid] = result
        return result

    def namespace_of(self, term: str) -> Namespace:
        return self.term(term).namespace

    def propagate(self, terms: Iterable[str]) -> frozenset[str]:
        """Close a term set upward under the true-path rule (obsolete terms dropped)."""
        out: set[str] = set()
        for t in terms:
            tid = self.resolve(t)
            if not self.terms[tid].obsolete:
                out.add(tid)
            out |= self.ancestors(tid)
        return frozenset(out)

    def roots(self) -> list[str]:
        return sorted(
            t.id for t in self.terms.values() if not t.obsolete and not any(self._live_parents(t.id))
        )

    def with_terms(self, extra: Iterable[Term], parents: Mapping[str, str]) -> Ontology:
        """Return a new ontology with ``extra`` terms added as is_a children of ``parents[id]``."""
        terms = dict(self.terms)
        edges = dict(self.edges)
        for t in extra:
            if t.id in terms or t.id in self._alt_index:
                raise OntologyError(f"duplicate term id {t.id}")
            terms[t.id] = t
            if t.id in parents:
                edges[t.id] = frozenset({(parents[t.id], Relation.IS_A)})
        digest = hashlib.sha256((self.checksum + "+" + ",".join(sorted(set(terms) - set(self.terms)))).encode())
        return Ontology(terms, edges, checksum=digest.hexdigest())


def ancestors(onto: Ontology, term: str) -> frozenset[str]:
    return onto.ancestors(term)


def namespace_of(onto: Ontology, term: str) -> Namespace:
    return onto.namespace_of(term)


def propagate(onto: Ontology, terms: Iterable[str]) -> frozenset[str]:
    return onto.propagate(terms)


def _find_cycle(nodes: Iterable[str], parents_of) -> list[str] | None:
    """Iterative DFS; returns one cycle as a node list (first node repeated) or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    for start in sorted(nodes):
        if color.get(start, WHITE) != WHITE:
            continue
        path = [start]
        iters = [iter(sorted(parents_of(start)))]
        color[start] = GREY
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                iters.pop()
                continue
            c = color.get(nxt, WHITE)
            if c == GREY:
                return path[path.index(nxt):] + [nxt]
            if c == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                iters.append(iter(sorted(parents_of(nxt))))
    return None


# -- OBO parsing ------------------------------------------------------------

_RELATIONS = {"part_of": Relation.PART_OF}


def parse_obo(source: str | TextIO) -> Ontology:
    """Parse the [Term] stanzas of an OBO file.

    Recognized tags: id, name, namespace, alt_id, is_a, is_obsolete and
    ``relationship: part_of``. Everything else, including other stanza
    types and other relationship types, is ignored.
    """
    text = source if isinstance(source, str) else source.read()
    checksum = hashlib.sha256(text.encode("utf-8")).hexdigest()

    terms: dict[str, Term] = {}
    edges: dict[str, set[tuple[str, Relation]]] = {}
    stanza: dict | None = None
    in_term = False

    def flush() -> None:
        if stanza is None:
            return
        tid = stanza.get("id")
        if tid is None:
            raise OntologyError(f"line {stanza['line']}: [Term] stanza without id")
        if tid in terms:
            raise OntologyError(f"duplicate term id {tid}")
        if "namespace" not in stanza:
            raise OntologyError(f"{tid}: missing namespace")
        terms[tid] = Term(
            id=tid,
            name=stanza.get("name", ""),
            namespace=Namespace.parse(stanza["namespace"]),
            obsolete=stanza.get("obsolete", False),
            alt_ids=frozenset(stanza.get("alt_ids", ())),
        )
        if stanza.get("edges"):
            edges[tid] = set(stanza["edges"])

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("[") and line.endswith("]"):
            flush()
            in_term = line == "[Term]"
            stanza = {"line": lineno} if in_term else None
            continue
        if not in_term or stanza is None:
            continue
        tag, sep, value = line.partition(":")
        if not sep:
            continue
        value = _strip_comment(value)
        tag = tag.strip()
        try:
            if tag == "id":
                stanza["id"] = check_go_id(value)
            elif tag == "name":
                stanza["name"] = value
            elif tag == "namespace":
                stanza["namespace"] = value
            elif tag == "alt_id":
                stanza.setdefault("alt_ids", []).append(check_go_id(value))
            elif tag == "is_obsolete":
                stanza["obsolete"] = value.lower() == "true"
            elif tag == "is_a":
                stanza.setdefault("edges", []).append((check_go_id(value.split()[0]), Relation.IS_A))
            elif tag == "relationship":
                parts = value.split()
                rel = _RELATIONS.get(parts[0]) if parts else None
                if rel is not None and len(parts) >= 2:
                    stanza.setdefault("edges", []).append((check_go_id(parts[1]), rel))
        except OntologyError as exc:
            raise OntologyError(f"line {lineno}: {exc}") from None
    flush()

    dangling = sorted(
        f"{child} -> {parent}"
        for child, ps in edges.items()
        for parent, _ in ps
        if parent not in terms
    )
    if dangling:
        raise OntologyError(f"edges reference undefined terms: {', '.join(dangling)}")
    return Ontology(terms, {k: frozenset(v) for k, v in edges.items()}, checksum=checksum)


def _strip_comment(value: str) -> str:
    # trailing "! comment" and {qualifiers}
    value = value.split(" !", 1)[0]
    if "{" in value and value.rstrip().endswith("}"):
        value = value[: value.index("{")]
    return value.strip()


def load_obo(path: str | Path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        return parse_obo(fh)
