"""Sequence variants, follow-up test case generation and variant selection."""

from __future__ import annotations

import bisect
import csv
import heapq
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .sequence import FastaError, ProteinRecord, read_fasta, save_fasta

PAIR_SEPARATOR = "|"

VARIANT_TSV_COLUMNS = (
    "variant_id",
    "protein_id",
    "kind",
    "position",
    "ref",
    "alt",
    "category",
    "publication_count",
    "isoform_fasta_path",
)


class VariantError(ValueError):
    pass


class ReferenceMismatch(VariantError):
    """The canonical residue at a substitution site is not the expected one."""

    def __init__(self, protein_id: str, position: int, expected: str, found: str):
        self.protein_id = protein_id
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(
            f"{protein_id}: reference mismatch at position {position}: "
            f"expected {expected!r}, found {found!r}"
        )


class Category(str, Enum):
    DISEASE = "disease"
    NATURAL = "natural"
    SPLICE = "splice"


@dataclass(frozen=True)
class PointSubstitution:
    position: int
    ref_residue: str
    alt_residue: str

    def __post_init__(self) -> None:
        if self.position < 1:
            raise VariantError(f"position must be >= 1, got {self.position}")
        for r in (self.ref_residue, self.alt_residue):
            if len(r) != 1:
                raise VariantError(f"substitution residues must be single characters, got {r!r}")
        object.__setattr__(self, "ref_residue", self.ref_residue.upper())
        object.__setattr__(self, "alt_residue", self.alt_residue.upper())
        if self.ref_residue == self.alt_residue:
            raise VariantError(f"ref and alt are identical ({self.ref_residue}) at {self.position}")

    def inverse(self) -> PointSubstitution:
        return PointSubstitution(self.position, self.alt_residue, self.ref_residue)


@dataclass(frozen=True)
class FullSequence:
    isoform_id: str
    sequence: str

    def __post_init__(self) -> None:
        # validates the residues
        rec = ProteinRecord(self.isoform_id, "", self.sequence)
        object.__setattr__(self, "sequence", rec.sequence)


@dataclass(frozen=True)
class VariantSpec:
    variant_id: str
    protein_id: str
    kind: PointSubstitution | FullSequence
    category: Category = Category.DISEASE
    publication_count: int = 0

    def __post_init__(self) -> None:
        if not self.variant_id or PAIR_SEPARATOR in self.variant_id:
            raise VariantError(f"invalid variant id {self.variant_id!r}")
        if self.publication_count < 0:
            raise VariantError(f"{self.variant_id}: negative publication count")
        object.__setattr__(self, "category", Category(self.category))

    @property
    def position(self) -> int | None:
        return self.kind.position if isinstance(self.kind, PointSubstitution) else None


@dataclass(frozen=True)
class TestCasePair:
    source: ProteinRecord
    follow_up: ProteinRecord
    variant: VariantSpec

    __test__ = False  # not a pytest class

    @property
    def pair_id(self) -> str:
        return self.follow_up.id

    @property
    def protein_id(self) -> str:
        return self.source.id


def follow_up_id(protein_id: str, variant_id: str) -> str:
    return f"{protein_id}{PAIR_SEPARATOR}{variant_id}"


def canonical_id_of(record_id: str) -> str:
    return record_id.split(PAIR_SEPARATOR, 1)[0]


def apply_variant(canonical: ProteinRecord, spec: VariantSpec) -> ProteinRecord:
    """Return the follow-up record obtained by applying ``spec`` to ``canonical``."""
    if spec.protein_id != canonical.id:
        raise VariantError(
            f"variant {spec.variant_id} targets {spec.protein_id}, not {canonical.id}"
        )
    rid = follow_up_id(canonical.id, spec.variant_id)
    desc = f"{spec.variant_id} {spec.category.value} variant of {canonical.id}"
    kind = spec.kind
    if isinstance(kind, FullSequence):
        if kind.sequence == canonical.sequence:
            raise VariantError(f"isoform {kind.isoform_id} is identical to the canonical sequence")
        return ProteinRecord(rid, desc, kind.sequence)

    seq = canonical.sequence
    if kind.position > len(seq):
        raise VariantError(
            f"{spec.variant_id}: position {kind.position} out of range 1..{len(seq)}"
        )
    found = seq[kind.position - 1]
    if found != kind.ref_residue:
        raise ReferenceMismatch(canonical.id, kind.position, kind.ref_residue, found)
    i = kind.position - 1
    return ProteinRecord(rid, desc, seq[:i] + kind.alt_residue + seq[i + 1 :])


def generate_pairs(
    canonicals: Sequence[ProteinRecord], specs: Iterable[VariantSpec]
) -> list[TestCasePair]:
    """Build one source/follow-up pair per variant, ordered by (protein_id, variant_id)."""
    by_id: dict[str, list[ProteinRecord]] = {}
    for rec in canonicals:
        by_id.setdefault(rec.id, []).append(rec)
    specs = list(specs)
    orphans = [s.variant_id for s in specs if len(by_id.get(s.protein_id, ())) != 1]
    if orphans:
        raise VariantError(f"variants without exactly one canonical sequence: {', '.join(orphans)}")
    pairs = [
        TestCasePair(by_id[s.protein_id][0], apply_variant(by_id[s.protein_id][0], s), s)
        for s in specs
    ]
    pairs.sort(key=lambda p: (p.variant.protein_id, p.variant.variant_id))
    return pairs


def allocate_variant_counts(
    proteins: Sequence[tuple[str, int]], total_budget: int
) -> dict[str, int]:
    """Split ``total_budget`` variants across proteins in proportion to length.

    Largest-remainder (Hamilton) apportionment: each protein's quota is
    ``budget * length / total_length``; floors are assigned and leftover
    seats go to the largest fractional remainders, ties to the smaller id.
    Every protein is guaranteed at least one variant. When that floor binds,
    the result is the allocation closest to the quotas in L1 distance, which
    coincides with plain Hamilton apportionment whenever all quotas are >= 1.
    """
    n = len(proteins)
    if n == 0:
        if total_budget != 0:
            raise VariantError("budget given but no proteins")
        return {}
    if total_budget < n:
        raise VariantError(f"budget {total_budget} is smaller than protein count {n}")
    if any(length <= 0 for _, length in proteins):
        raise VariantError("sequence lengths must be positive")
    if len({pid for pid, _ in proteins}) != n:
        raise VariantError("duplicate protein ids")

    total_len = sum(length for _, length in proteins)
    scaled_quota = {pid: total_budget * length for pid, length in proteins}

    def marginal(pid: str, c: int) -> int:
        # change in total_len * |count - quota| when count goes c -> c + 1
        q = scaled_quota[pid]
        return abs((c + 1) * total_len - q) - abs(c * total_len - q)

    counts = {pid: 1 for pid, _ in proteins}
    heap = [(marginal(pid, 1), pid) for pid in counts]
    heapq.heapify(heap)
    for _ in range(total_budget - n):
        _, pid = heapq.heappop(heap)
        counts[pid] += 1
        heapq.heappush(heap, (marginal(pid, counts[pid]), pid))
    return counts


def segment_bounds(length: int, count: int) -> list[tuple[int, int]]:
    """Inclusive 1-based (start, end) of ``count`` near-equal contiguous segments.

    The first ``length % count`` segments are one residue longer.
    """
    if count < 1:
        raise VariantError("segment count must be >= 1")
    if count > length:
        raise VariantError(f"cannot split {length} residues into {count} segments")
    base, extra = divmod(length, count)
    bounds = []
    start = 1
    for i in range(count):
        size = base + (1 if i < extra else 0)
        bounds.append((start, start + size - 1))
        start += size
    return bounds


def select_variants(
    canonical: ProteinRecord, candidates: Iterable[VariantSpec], count: int
) -> list[VariantSpec]:
    """Pick the best-evidenced substitution from each of ``count`` sequence segments.

    Within a segment the candidate with the most publications wins; ties go
    to the lowest position, then the smallest variant id. Empty segments
    contribute nothing, so the result may be shorter than ``count``.
    """
    bounds = segment_bounds(len(canonical.sequence), count)
    best: list[VariantSpec | None] = [None] * count
    starts = [b[0] for b in bounds]
    for spec in candidates:
        if spec.protein_id != canonical.id or not isinstance(spec.kind, PointSubstitution):
            raise VariantError(f"{spec.variant_id} is not a point substitution of {canonical.id}")
        pos = spec.kind.position
        if pos > len(canonical.sequence):
            raise VariantError(f"{spec.variant_id}: position {pos} beyond sequence end")
        seg = bisect.bisect_right(starts, pos) - 1
        cur = best[seg]
        if cur is None or _rank(spec) < _rank(cur):
            best[seg] = spec
    return [s for s in best if s is not None]


def _rank(spec: VariantSpec) -> tuple[int, int, str]:
    return (-spec.publication_count, spec.kind.position, spec.variant_id)


# -- TSV fixtures -----------------------------------------------------------


def read_variant_tsv(path: str | Path) -> list[VariantSpec]:
    """Load variant specs; isoform FASTA paths are resolved relative to the TSV."""
    path = Path(path)
    specs = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = set(VARIANT_TSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise VariantError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                specs.append(_spec_from_row(row, path.parent))
            except (VariantError, FastaError, ValueError) as exc:
                raise VariantError(f"{path}:{lineno}: {exc}") from exc
    return specs


def _spec_from_row(row: dict[str, str], base: Path) -> VariantSpec:
    kind_name = row["kind"].strip()
    if kind_name == "point":
        kind: PointSubstitution | FullSequence = PointSubstitution(
            int(row["position"]), row["ref"].strip(), row["alt"].strip()
        )
    elif kind_name == "isoform":
        fasta = base / row["isoform_fasta_path"].strip()
        recs = read_fasta(fasta)
        if len(recs) != 1:
            raise VariantError(f"{fasta}: expected exactly one isoform record")
        kind = FullSequence(recs[0].id, recs[0].sequence)
    else:
        raise VariantError(f"unknown variant kind {kind_name!r}")
    return VariantSpec(
        variant_id=row["variant_id"].strip(),
        protein_id=row["protein_id"].strip(),
        kind=kind,
        category=Category(row["category"].strip()),
        publication_count=int(row["publication_count"] or 0),
    )


def write_variant_tsv(specs: Iterable[VariantSpec], path: str | Path) -> Path:
    """Write specs as TSV; isoform sequences are written next to it as FASTA files."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(VARIANT_TSV_COLUMNS)
        for s in specs:
            k = s.kind
            if isinstance(k, PointSubstitution):
                w.writerow([s.variant_id, s.protein_id, "point", k.position, k.ref_residue,
                            k.alt_residue, s.category.value, s.publication_count, ""])
            else:
                name = f"{k.isoform_id}.fasta"
                save_fasta([ProteinRecord(k.isoform_id, "", k.sequence)], path.parent / name)
                w.writerow([s.variant_id, s.protein_id, "isoform", "", "", "",
                            s.category.value, s.publication_count, name])
    return path
