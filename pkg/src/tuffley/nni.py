"""NNI-tree space on the coatoms of the bounded Tuffley poset, and the
critical-triplet machinery used to rule out recursive coatom orderings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .forest import Edge, XForest, XTree, caterpillar, contract_edge, delete_edge, internal_edges, nni_neighbors
from .poset import Poset, bounded_tuffley


class CrossValidationError(RuntimeError):
    """The two constructions of G_NNI disagree; this is a bug, not a data condition."""


@dataclass(frozen=True)
class NNIEdge:
    split: tuple[tuple[int, ...], tuple[int, ...]]
    common: tuple[int, ...]


@dataclass
class NNIGraph:
    n: int
    vertices: list[int]
    adjacency: dict[int, set[int]]
    edges: dict[tuple[int, int], NNIEdge] = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency.values()) // 2

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.adjacency.get(a, ())

    def degrees(self) -> set[int]:
        return {len(self.adjacency[v]) for v in self.vertices}

    def restrict(self, keep: Iterable[int]) -> "NNIGraph":
        keep = sorted(set(keep))
        kept = set(keep)
        return NNIGraph(
            self.n,
            keep,
            {v: self.adjacency[v] & kept for v in keep},
            {e: d for e, d in self.edges.items() if e[0] in kept and e[1] in kept},
        )

    def to_dot(self, p: Poset, mark: Sequence[int] = ()) -> str:
        bold = {_pair(a, b) for a, b in zip(mark, list(mark[1:]) + list(mark[:1]))} if mark else set()
        lines = [f"graph G_NNI_{self.n} {{", "  node [shape=box, fontsize=10];"]
        for v in self.vertices:
            style = ", penwidth=3" if v in mark else ""
            lines.append(f'  c{v} [label="{p.codes[v]}"{style}];')
        for a, b in sorted(self.edges):
            style = " [style=bold, penwidth=4]" if (a, b) in bold else ""
            lines.append(f"  c{a} -- c{b}{style};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _as_poset(p: Poset | int) -> Poset:
    return bounded_tuffley(p) if isinstance(p, int) else p


def nni_edges_by_moves(p: Poset) -> dict[tuple[int, int], tuple[tuple[int, ...], tuple[int, ...]]]:
    """G_NNI edges from NNI moves, tagged with the split of the edge alpha used."""
    out = {}
    for a in p.coatoms():
        f = p.forest(a)
        t = f.blocks[0]
        for alpha in internal_edges(t):
            left, right = t.split(alpha)
            tag = tuple(sorted(left)), tuple(sorted(right))
            for g in nni_neighbors(f, alpha):
                out.setdefault(_pair(a, p.index[g.code]), tag)
    return out


def nni_edges_by_common_covers(p: Poset) -> dict[tuple[int, int], tuple[int, ...]]:
    """G_NNI edges as pairs of coatoms that cover a common element."""
    coatoms = set(p.coatoms())
    shared: dict[tuple[int, int], list[int]] = {}
    for w in range(len(p)):
        above = sorted(u for u in p.upper[w] if u in coatoms)
        for a, b in combinations(above, 2):
            shared.setdefault((a, b), []).append(w)
    return {e: tuple(ws) for e, ws in shared.items()}


def build_nni_graph(p: Poset | int) -> NNIGraph:
    """G_NNI(n), built from NNI moves and cross-checked against shared covered elements."""
    p = _as_poset(p)
    by_moves = nni_edges_by_moves(p)
    by_covers = nni_edges_by_common_covers(p)
    if set(by_moves) != set(by_covers):
        only_moves = sorted(set(by_moves) - set(by_covers))
        only_covers = sorted(set(by_covers) - set(by_moves))
        raise CrossValidationError(f"NNI-only edges {only_moves[:5]}, common-cover-only edges {only_covers[:5]}")
    vertices = sorted(p.coatoms())
    adjacency: dict[int, set[int]] = {v: set() for v in vertices}
    for a, b in by_moves:
        adjacency[a].add(b)
        adjacency[b].add(a)
    edges = {e: NNIEdge(by_moves[e], by_covers[e]) for e in sorted(by_moves)}
    return NNIGraph(p.n, vertices, adjacency, edges)


def components(g: NNIGraph) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for s in g.vertices:
        if s in seen:
            continue
        comp = []
        stack = [s]
        seen.add(s)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in g.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out.append(sorted(comp))
    return out


def gallery_connected(g: NNIGraph) -> list[list[int]] | None:
    """``None`` when the facet-ridge graph is connected, else its components."""
    comps = components(g)
    return None if len(comps) <= 1 else comps


def check_cover_multiplicity(p: Poset) -> dict | None:
    """Each element covered by a coatom is covered by 3 coatoms (internal edge) or 1 (leaf edge)."""
    coatoms = set(p.coatoms())
    for c in sorted(coatoms):
        f = p.forest(c)
        t = f.blocks[0]
        for e in t.edges:
            w = p.index.get(contract_edge(f, 0, e).code)
            if w is None or w not in p.covers[c]:
                return {"coatom": p.codes[c], "edge": list(e), "problem": "contraction is not a lower cover"}
            count = sum(1 for u in p.upper[w] if u in coatoms)
            expected = 1 if t.is_leaf_edge(e) else 3
            if count != expected:
                return {"element": p.codes[w], "coatoms_above": count, "expected": expected}
        if len(p.covers[c]) != len(t.edges):
            return {"coatom": p.codes[c], "problem": "lower covers are not exactly the edge contractions"}
    return None


def classify_cycle(g: NNIGraph, p: Poset, cycle: Sequence[int]) -> str:
    """'trivial', 'nontrivial' or 'not-a-cycle' for a closed vertex sequence of coatoms."""
    cycle = list(cycle)
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        return "not-a-cycle"
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if not g.adjacent(a, b):
            return "not-a-cycle"
    if len(cycle) > 3:
        return "nontrivial"
    a, b, c = cycle
    if not set(p.covers[a]) & set(p.covers[b]) & set(p.covers[c]):
        raise CrossValidationError(f"triangle {cycle} has no common covered element")
    return "trivial"


def canonical_cycle_K(n: int) -> list[XForest]:
    """The six caterpillars forming the nontrivial cycle K, in cycle order.

    The three middle positions run through every arrangement of
    ``n-3, n-2, n-1``; leaf 1 closes the cherry at one end and leaf ``n``
    sits at the far end (paired with 2 once n >= 6).
    """
    if n < 5:
        raise ValueError("K requires n >= 5")
    a, b, c = n - 1, n - 2, n - 3
    middles = [(a, b, c), (b, a, c), (b, c, a), (c, b, a), (c, a, b), (a, c, b)]
    tail = [n] if n == 5 else list(range(3, n - 3)) + [2, n]
    return [caterpillar([1, *m, *tail], n) for m in middles]


def cycle_indices(p: Poset, trees: Iterable[XForest]) -> list[int]:
    return [p.index[t.code] for t in trees]


@dataclass
class CriticalContext:
    i: int
    j: int
    k: int
    x: int
    e_x: Edge
    e_x1: Edge
    e_x2: Edge
    F_j: int
    F_k: int
    F_ijk: int
    T_F: XTree
    vmap: dict[int, int]
    emap: dict[int, Edge]

    @property
    def triple(self) -> tuple[int, int, int]:
        return self.i, self.j, self.k

    def to_json(self, p: Poset) -> dict:
        return {
            "triple": [p.codes[self.i], p.codes[self.j], p.codes[self.k]],
            "x": self.x,
            "F_j": p.codes[self.F_j],
            "F_k": p.codes[self.F_k],
            "F_ijk": p.codes[self.F_ijk],
            "T_F": {
                "vertices": [sorted(v) for v in self.T_F.vertices],
                "edges": [list(e) for e in self.T_F.edges],
            },
            "vmap": [[p.codes[a], v] for a, v in sorted(self.vmap.items(), key=lambda kv: p.codes[kv[0]])],
            "emap": [[p.codes[c], list(e)] for c, e in sorted(self.emap.items(), key=lambda kv: p.codes[kv[0]])],
        }


def _with_x(F: XForest, x: int) -> tuple[XTree, int]:
    """The (X - x)-tree of F and the index of the singleton block {x}."""
    blocks = F.blocks
    if len(blocks) != 2:
        raise ValueError("F_ijk must have exactly two blocks")
    xi = next(bi for bi, b in enumerate(blocks) if b.vertices == (frozenset([x]),))
    return blocks[1 - xi], xi


def _attach_at_vertex(T: XTree, x: int, v: int, n: int) -> XForest:
    xv = len(T.vertices)
    return XForest.tree(n, list(T.vertices) + [frozenset([x])], list(T.edges) + [(v, xv)])


def _attach_on_edge(T: XTree, x: int, e: Edge, n: int) -> XForest:
    w, xv = len(T.vertices), len(T.vertices) + 1
    edges = [d for d in T.edges if d != e] + [(e[0], w), (w, e[1]), (w, xv)]
    return XForest.tree(n, list(T.vertices) + [frozenset(), frozenset([x])], edges)


def _delete_leaf_edge(F: XForest, x: int) -> XForest:
    t = F.blocks[0]
    lv = t.label_vertex(x)
    (nb,) = t.adjacency[lv]
    return delete_edge(F, 0, (lv, nb))


def _flanked_leaves(t: XTree) -> list[tuple[int, Edge, Edge, Edge]]:
    """Leaves whose leaf edge meets two internal edges: (x, e_x, e_x1, e_x2)."""
    out = []
    for leaf, labels in enumerate(t.vertices):
        if t.degree(leaf) != 1:
            continue
        (p_,) = t.adjacency[leaf]
        others = [w for w in t.adjacency[p_] if w != leaf]
        if len(others) == 2 and all(t.degree(w) > 1 for w in others):
            e1, e2 = sorted(tuple(sorted((p_, w))) for w in others)
            out.append((min(labels), tuple(sorted((leaf, p_))), e1, e2))
    return out


def find_critical_triplets(p: Poset | int) -> list[CriticalContext]:
    p = _as_poset(p)
    coatoms = set(p.coatoms())
    seen: set[tuple[int, frozenset[int]]] = set()
    out = []
    for i in sorted(coatoms):
        Ci = p.forest(i)
        for x, e_x, e_x1, e_x2 in _flanked_leaves(Ci.blocks[0]):
            Fj_forest = contract_edge(Ci, 0, e_x1)
            Fk_forest = contract_edge(Ci, 0, e_x2)
            F_j, F_k = p.index[Fj_forest.code], p.index[Fk_forest.code]
            F_ijk = p.index[_delete_leaf_edge(Fj_forest, x).code]
            T_F, _ = _with_x(p.forest(F_ijk), x)
            vmap = {p.index[_attach_at_vertex(T_F, x, v, p.n).code]: v for v in range(len(T_F.vertices))}
            emap = {p.index[_attach_on_edge(T_F, x, e, p.n).code]: e for e in T_F.edges}
            js = sorted(u for u in p.upper[F_j] if u in coatoms and u != i)
            ks = sorted(u for u in p.upper[F_k] if u in coatoms and u != i)
            for j in js:
                for k in ks:
                    key = (i, frozenset((j, k)))
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append(CriticalContext(i, j, k, x, e_x, e_x1, e_x2, F_j, F_k, F_ijk, T_F, vmap, emap))
    return out


def coatoms_above(p: Poset, F: int) -> list[int]:
    return [c for c in p.coatoms() if p.leq(F, c)]


def induced_subgraph(g: NNIGraph, p: Poset, F: int) -> NNIGraph:
    return g.restrict(coatoms_above(p, F))


def _fijk_via(p: Poset, C: int, F_side: int, x: int) -> str | None:
    """Contract the edge of C giving F_side, then delete the leaf edge of x."""
    f = p.forest(C)
    for e in f.blocks[0].edges:
        g = contract_edge(f, 0, e)
        if g.code == p.codes[F_side]:
            return _delete_leaf_edge(g, x).code
    return None


def verify_triplet(ctx: CriticalContext, p: Poset, g: NNIGraph) -> dict | None:
    """Definition-level checks: covers, non-adjacency of C_j/C_k, agreement of F_ijk, bijectivity of the maps."""
    if not {ctx.i, ctx.j} <= set(p.upper[ctx.F_j]) or not {ctx.i, ctx.k} <= set(p.upper[ctx.F_k]):
        return {"check": "cover conditions", "triple": ctx.triple}
    if g.adjacent(ctx.j, ctx.k):
        return {"check": "C_j and C_k adjacent", "triple": ctx.triple}
    via_j = _fijk_via(p, ctx.j, ctx.F_j, ctx.x)
    via_k = _fijk_via(p, ctx.k, ctx.F_k, ctx.x)
    if not via_j == via_k == p.codes[ctx.F_ijk]:
        return {"check": "F_ijk disagreement", "via_j": via_j, "via_k": via_k, "F_ijk": p.codes[ctx.F_ijk]}
    covers_of_f = set(p.upper[ctx.F_ijk])
    if set(ctx.vmap) != covers_of_f or sorted(ctx.vmap.values()) != list(range(len(ctx.T_F.vertices))):
        return {"check": "vmap is not a bijection onto V(T_F)"}
    if set(ctx.emap) != set(coatoms_above(p, ctx.F_ijk)) or sorted(ctx.emap.values()) != sorted(ctx.T_F.edges):
        return {"check": "emap is not a bijection onto E(T_F)"}
    if set(ctx.emap[ctx.i]) != {ctx.vmap[ctx.F_j], ctx.vmap[ctx.F_k]}:
        return {"check": "e(C_i) does not join v(F_j) and v(F_k)"}
    return None


def verify_tf_lemma(ctx: CriticalContext, p: Poset) -> dict | None:
    """C covers A iff e(C) meets v(A); and two coatoms share a cover above F iff their edges meet."""
    for A, v in ctx.vmap.items():
        for C, e in ctx.emap.items():
            covers = A in p.covers[C]
            incident = v in e
            if covers != incident:
                return {"A": p.codes[A], "C": p.codes[C], "covers": covers, "incident": incident}
    for C, D in combinations(sorted(ctx.emap), 2):
        shared = any(p.lt(ctx.F_ijk, z) for z in set(p.covers[C]) & set(p.covers[D]))
        meet = bool(set(ctx.emap[C]) & set(ctx.emap[D]))
        if shared != meet:
            return {"C": p.codes[C], "D": p.codes[D], "shared_cover_above_F": shared, "edges_meet": meet}
    return None


def adjacency_divergence(ctx: CriticalContext, p: Poset, g: NNIGraph) -> list[tuple[int, int]]:
    """Pairs above F_ijk that are G_NNI-adjacent but share no covered element above F_ijk."""
    out = []
    for C, D in combinations(sorted(ctx.emap), 2):
        shared = any(p.lt(ctx.F_ijk, z) for z in set(p.covers[C]) & set(p.covers[D]))
        if g.adjacent(C, D) != shared:
            out.append((C, D))
    return out


def simple_cycles(adj: dict[int, set[int]]) -> list[list[int]]:
    """Every simple cycle of length >= 3, once per direction, rooted at its least vertex."""
    out = []

    def walk(start: int, path: list[int], on: set[int]) -> None:
        for w in sorted(adj[path[-1]]):
            if w == start and len(path) >= 3:
                out.append(list(path))
            elif w > start and w not in on:
                path.append(w)
                on.add(w)
                walk(start, path, on)
                on.discard(w)
                path.pop()

    for s in sorted(adj):
        walk(s, [s], {s})
    return out


def simple_paths(adj: dict[int, set[int]], src: int, dst: int) -> list[list[int]]:
    out = []

    def walk(path: list[int], on: set[int]) -> None:
        v = path[-1]
        if v == dst:
            out.append(list(path))
            return
        for w in sorted(adj[v]):
            if w not in on:
                path.append(w)
                on.add(w)
                walk(path, on)
                on.discard(w)
                path.pop()

    walk([src], {src})
    return out


def no_nontrivial_f_cycles(g: NNIGraph, p: Poset, F: int) -> dict | None:
    """The F-paths form a connected graph with no simple cycle longer than 3."""
    sub = induced_subgraph(g, p, F)
    for cyc in simple_cycles(sub.adjacency):
        if len(cyc) > 3:
            return {"kind": "nontrivial F-cycle", "cycle": [p.codes[v] for v in cyc]}
    comps = components(sub)
    if len(comps) > 1:
        return {"kind": "disconnected", "components": [[p.codes[v] for v in c] for c in comps]}
    return None


def verify_no_nontrivial_f_cycles(ctx: CriticalContext, p: Poset, g: NNIGraph) -> dict | None:
    return no_nontrivial_f_cycles(g, p, ctx.F_ijk)


def paths_avoid_pair(adj: dict[int, set[int]], target: int, a: int, b: int) -> list[int] | None:
    """A simple path into ``target`` visiting both ``a`` and ``b``, or ``None``."""
    for src in sorted(adj):
        for path in simple_paths(adj, src, target):
            if a in path and b in path:
                return path
    return None


def verify_fpath_exclusivity(ctx: CriticalContext, p: Poset, g: NNIGraph) -> dict | None:
    sub = induced_subgraph(g, p, ctx.F_ijk)
    path = paths_avoid_pair(sub.adjacency, ctx.i, ctx.j, ctx.k)
    if path is not None:
        return {"path": [p.codes[v] for v in path]}
    return None


def verify_context(ctx: CriticalContext, p: Poset, g: NNIGraph) -> dict[str, dict | None]:
    return {
        "triplet": verify_triplet(ctx, p, g),
        "tf_lemma": verify_tf_lemma(ctx, p),
        "no_nontrivial_f_cycles": verify_no_nontrivial_f_cycles(ctx, p, g),
        "fpath_exclusivity": verify_fpath_exclusivity(ctx, p, g),
    }


def contexts_json(contexts: Sequence[CriticalContext], p: Poset) -> str:
    return json.dumps([c.to_json(p) for c in contexts], sort_keys=True, indent=1)
