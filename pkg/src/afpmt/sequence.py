"""Protein sequences and FASTA input/output."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

STANDARD_RESIDUES = frozenset("ACDEFGHIKLMNPQRSTVWY")
EXTENDED_RESIDUES = STANDARD_RESIDUES | frozenset("BZXUO")

LINE_WIDTH = 60


class FastaError(ValueError):
    """Raised for malformed FASTA input or invalid sequence content."""


def _check_residues(residues: str, strict: bool) -> str | None:
    alphabet = STANDARD_RESIDUES if strict else EXTENDED_RESIDUES
    for ch in residues:
        if ch not in alphabet:
            return ch
    return None


@dataclass(frozen=True)
class ProteinRecord:
    """A named amino-acid sequence; positions into ``sequence`` are 1-based."""

    id: str
    description: str
    sequence: str

    def __post_init__(self) -> None:
        if not self.id or any(c.isspace() for c in self.id):
            raise FastaError(f"invalid record id {self.id!r}")
        if not self.sequence:
            raise FastaError(f"record {self.id}: empty sequence")
        seq = self.sequence.upper()
        bad = _check_residues(seq, strict=False)
        if bad is not None:
            raise FastaError(f"record {self.id}: invalid residue {bad!r}")
        object.__setattr__(self, "sequence", seq)

    def __len__(self) -> int:
        return len(self.sequence)

    def residue(self, position: int) -> str:
        if not 1 <= position <= len(self.sequence):
            raise IndexError(
                f"position {position} out of range 1..{len(self.sequence)} for {self.id}"
            )
        return self.sequence[position - 1]


def parse_fasta(source: str | TextIO, strict: bool = False) -> list[ProteinRecord]:
    """Parse protein FASTA text into records, preserving input order.

    ``source`` may be a string or an open text stream. The record id is the
    first whitespace-delimited token of the header; the rest of the line is
    the description. Sequence lines are concatenated and uppercased. With
    ``strict`` only the 20 standard residues are accepted.
    """
    text = source if isinstance(source, str) else source.read()
    if not text.strip():
        raise FastaError("empty FASTA input")

    records: list[ProteinRecord] = []
    header: tuple[str, str] | None = None
    header_line = 0
    chunks: list[str] = []

    def flush() -> None:
        if header is None:
            return
        rid, desc = header
        if not chunks:
            raise FastaError(f"record {rid} (line {header_line}): header has no sequence")
        records.append(ProteinRecord(rid, desc, "".join(chunks)))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            parts = line[1:].strip().split(None, 1)
            if not parts:
                raise FastaError(f"line {lineno}: header without an id")
            header = (parts[0], parts[1].strip() if len(parts) > 1 else "")
            header_line = lineno
            chunks = []
            continue
        if header is None:
            raise FastaError(f"line {lineno}: sequence data before the first '>' header")
        residues = "".join(line.split()).upper()
        bad = _check_residues(residues, strict)
        if bad is not None:
            raise FastaError(
                f"invalid residue {bad!r} at record {header[0]}, line {lineno}"
            )
        chunks.append(residues)
    flush()
    return records


def read_fasta(path: str | Path, strict: bool = False) -> list[ProteinRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_fasta(fh, strict=strict)


def write_fasta(records: Iterable[ProteinRecord], width: int = LINE_WIDTH) -> str:
    """Serialize records as FASTA text with ``width`` residues per line and LF endings."""
    out = io.StringIO()
    for rec in records:
        header = f">{rec.id} {rec.description}" if rec.description else f">{rec.id}"
        out.write(header + "\n")
        seq = rec.sequence
        for i in range(0, len(seq), width):
            out.write(seq[i : i + width] + "\n")
    return out.getvalue()


def save_fasta(records: Iterable[ProteinRecord], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(write_fasta(records), encoding="utf-8", newline="\n")
    return path
