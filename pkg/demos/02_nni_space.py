"""The coatom graph: two trivalent trees are joined when they share a covered forest."""
from __future__ import annotations

from tuffley import augment, build_nni_graph, build_tuffley, canonical_cycle_K, classify_cycle
from tuffley.nni import cycle_indices, gallery_connected

for n in (4, 5, 6):
    g = build_nni_graph(augment(build_tuffley(n)))
    print(f"n={n}: {len(g.vertices)} trees, {g.num_edges} NNI edges, degrees {sorted(g.degrees())}, "
          f"connected={gallery_connected(g) is None}")

p = augment(build_tuffley(5))
g = build_nni_graph(p)
K = cycle_indices(p, canonical_cycle_K(5))
print("\nsix caterpillars forming a hexagon:")
for c in K:
    print("  ", p.codes[c])
print("classified as", classify_cycle(g, p, K))
p4 = augment(build_tuffley(4))
g4 = build_nni_graph(p4)
print("the triangle of the n=4 graph is", classify_cycle(g4, p4, g4.vertices))
