"""
Building source and follow-up test cases
========================================

Each test case pair couples a canonical protein with one of its variants.
"""

from afpmt.config import BUNDLED_CANONICALS, BUNDLED_VARIANTS
from afpmt.sequence import read_fasta
from afpmt.variants import generate_pairs, read_variant_tsv

canonicals = [rec for path in BUNDLED_CANONICALS for rec in read_fasta(path)]
for rec in canonicals:
    print(f"{rec.id:8s} {len(rec):4d} aa  {rec.description}")

# the bundled variant table: disease substitutions, natural substitutions, isoforms
specs = read_variant_tsv(BUNDLED_VARIANTS)
pairs = generate_pairs(canonicals, specs)
print(f"\n{len(pairs)} pairs")

# a point substitution changes exactly one residue
tyro = next(p for p in pairs if p.variant.variant_id == "VAR_007652")
pos = tyro.variant.position
print(tyro.pair_id, tyro.source.residue(pos), "->", tyro.follow_up.residue(pos), "at", pos)

# an isoform replaces the whole sequence, length included
iso = next(p for p in pairs if p.variant.variant_id == "O00206-2")
print(iso.pair_id, len(iso.source), "->", len(iso.follow_up), "residues")
