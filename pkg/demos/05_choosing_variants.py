"""
Spreading variants over proteins and along sequences
====================================================

With a fixed budget of variants, longer proteins get more of them, and
within a protein the picks are spread out along the sequence.
"""

from afpmt.config import BUNDLED_CANONICALS, BUNDLED_VARIANTS
from afpmt.sequence import read_fasta
from afpmt.variants import allocate_variant_counts, read_variant_tsv, segment_bounds, select_variants

canonicals = {rec.id: rec for path in BUNDLED_CANONICALS for rec in read_fasta(path)}
lengths = [(pid, len(rec)) for pid, rec in sorted(canonicals.items())]
print(lengths)

for budget in (3, 7, 15):
    print(budget, allocate_variant_counts(lengths, budget))

# choose 3 of the 7 tyrosinase substitutions, one per third of the sequence
tyro = canonicals["P14679"]
candidates = [s for s in read_variant_tsv(BUNDLED_VARIANTS) if s.protein_id == "P14679"]
print(segment_bounds(len(tyro), 3))
for spec in select_variants(tyro, candidates, 3):
    print(spec.variant_id, spec.position, spec.publication_count)
