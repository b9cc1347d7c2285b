"""Walk through one critical triplet at n = 5 and the five coatoms above its shared forest."""
from __future__ import annotations

from tuffley import augment, build_nni_graph, build_tuffley, find_critical_triplets, verify_context
from tuffley.nni import coatoms_above, induced_subgraph

p = augment(build_tuffley(5))
g = build_nni_graph(p)
contexts = find_critical_triplets(p)
print(f"{len(contexts)} critical contexts at n=5")

ctx = contexts[0]
print("C_i =", p.codes[ctx.i], " leaf x =", ctx.x)
print("C_j =", p.codes[ctx.j])
print("C_k =", p.codes[ctx.k])
print("C_j and C_k adjacent?", g.adjacent(ctx.j, ctx.k))
print("F_ijk =", p.codes[ctx.F_ijk])

above = coatoms_above(p, ctx.F_ijk)
sub = induced_subgraph(g, p, ctx.F_ijk)
print(f"{len(above)} coatoms above F_ijk, {sub.num_edges} edges among them")
for (a, b) in sorted(sub.edges):
    tag = lambda c: {ctx.i: "C_i", ctx.j: "C_j", ctx.k: "C_k"}.get(c, "D")
    print(f"  {tag(a):>3} -- {tag(b)}")

failures = sum(any(w is not None for w in verify_context(c, p, g).values()) for c in contexts)
print(f"contexts failing a check: {failures}")
