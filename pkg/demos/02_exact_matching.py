"""
Why a parent term counts as a change
====================================

The relation compares GO term sets literally. Swapping a term for its
parent is a change even though the two are related in the ontology.
"""

from afpmt.config import BUNDLED_ONTOLOGY
from afpmt.mr_engine import check_mr_change, diagnostic_difference
from afpmt.ontology import load_obo

go = load_obo(BUNDLED_ONTOLOGY)
print(len(go), "terms, sha256", go.checksum[:12])

child = "GO:0004503"  # tyrosinase activity
parents = [p for p, _ in go.parents(child)]
print(child, go.term(child).name, "| parents:", parents)
print("ancestors:", sorted(go.ancestors(child)))

# same set: the relation fails; parent instead of child: it passes
print(check_mr_change({child}, {child}).value)
print(check_mr_change({child}, {parents[0]}).value)

# the diagnostic view still says how the two terms are related
diff = diagnostic_difference({child}, {parents[0]}, go)
for removed, added, how in sorted(diff.hierarchical_note):
    print(f"{added} {how.value} {removed}")
