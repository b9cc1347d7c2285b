from __future__ import annotations

import random
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tuffley.forest import (
    InvalidForest,
    XForest,
    XTree,
    canonicalize,
    caterpillar,
    code_from_hex,
    code_hex,
    contract_edge,
    decode,
    delete_edge,
    enumerate_trivalent,
    internal_edges,
    lower_covers,
    nni_neighbors,
    quartet,
    safe_deletions,
    star,
    validate,
)


def splits(f: XForest) -> frozenset[frozenset[int]]:
    """Nontrivial splits of a single tree, each named by the side without label 1."""
    t = f.blocks[0]
    out = set()
    for e in internal_edges(t):
        a, b = t.split(e)
        out.add(b if 1 in a else a)
    return frozenset(out)


def to_nx(f: XForest) -> nx.Graph:
    g = nx.Graph()
    for bi, t in enumerate(f.blocks):
        for v, labels in enumerate(t.vertices):
            g.add_node((bi, v), labels=labels)
        g.add_edges_from(((bi, u), (bi, v)) for u, v in t.edges)
    return g


def shuffled(f: XForest, rng: random.Random) -> XForest:
    """Same forest with vertex indices permuted within blocks and blocks reordered."""
    blocks = []
    for t in f.blocks:
        perm = list(range(len(t.vertices)))
        rng.shuffle(perm)
        verts = [None] * len(perm)
        for old, new in enumerate(perm):
            verts[new] = t.vertices[old]
        edges = [(perm[u], perm[v]) if rng.random() < 0.5 else (perm[v], perm[u]) for u, v in t.edges]
        rng.shuffle(edges)
        blocks.append(XTree.build(verts, edges))
    rng.shuffle(blocks)
    return XForest(f.n, tuple(blocks))


def test_validate_examples():
    assert validate(XForest.tree(3, [[1, 2, 3]])) is None
    path = XForest.tree(2, [[1], [], [2]], [(0, 1), (1, 2)])
    assert validate(path) == "unlabeled vertex degree < 3"
    overlap = XForest.from_blocks(3, [XTree.build([[1, 2]]), XTree.build([[2, 3]])])
    assert validate(overlap) == "labels not a partition"


def test_validate_rejects_cycle_and_missing_label():
    cyc = XForest.tree(3, [[1], [2], [3]], [(0, 1), (1, 2), (0, 2)])
    assert validate(cyc) is not None
    assert validate(XForest.tree(3, [[1], [2]], [(0, 1)])) == "labels not a partition"


def test_canonicalize_vertex_order_invariance():
    a = XForest.tree(3, [[], [1], [2], [3]], [(0, 1), (0, 2), (0, 3)])
    b = XForest.tree(3, [[3], [2], [1], []], [(3, 2), (0, 3), (1, 3)])
    assert canonicalize(a) == canonicalize(b)
    path = XForest.tree(3, [[1], [2], [3]], [(0, 1), (1, 2)])
    assert canonicalize(a) != canonicalize(path)


def test_canonicalize_rejects_invalid():
    with pytest.raises(InvalidForest):
        canonicalize(XForest.tree(2, [[1], [], [2]], [(0, 1), (1, 2)]))


def test_fifteen_distinct_codes_at_five():
    codes = [t.code for t in enumerate_trivalent(5)]
    assert len(codes) == len(set(codes)) == 15


def test_codes_match_networkx_isomorphism(S):
    """Codes agree iff a label-preserving isomorphism exists (oracle: VF2)."""
    s = S(4)
    rng = random.Random(7)
    match = lambda a, b: a["labels"] == b["labels"]
    by_rank: dict[int, list[XForest]] = {}
    for f in s.forests:
        by_rank.setdefault(f.rank, []).append(f)
    for group in by_rank.values():
        for f, g in combinations(group, 2):
            assert not nx.is_isomorphic(to_nx(f), to_nx(g), node_match=match)
    for f in rng.sample(s.forests, 40):
        h = shuffled(f, rng)
        assert nx.is_isomorphic(to_nx(f), to_nx(h), node_match=match)
        assert h.code == f.code


def test_decode_round_trip(S):
    for f in S(5).forests:
        g = decode(f.code, 5)
        assert validate(g) is None
        assert g.code == f.code
        assert code_from_hex(code_hex(f.code)) == f.code
    assert XForest.from_json(f.to_json()).code == f.code


@settings(max_examples=60, deadline=None)
@given(index=st.integers(min_value=0, max_value=1472), seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_code_stable_under_index_permutations(S, index, seed):
    f = S(5).forests[index]
    rng = random.Random(seed)
    assert shuffled(f, rng).code == f.code


def test_code_stable_hundred_permutations_each(S):
    rng = random.Random(11)
    for f in rng.sample(S(5).forests, 15):
        assert all(shuffled(f, rng).code == f.code for _ in range(100))


def test_contract_leaf_edge_of_star():
    s = star([1, 2, 3])
    t = s.blocks[0]
    edge = (0, t.label_vertex(1))
    got = contract_edge(s, 0, edge)
    assert got == XForest.tree(3, [[2], [1], [3]], [(0, 1), (1, 2)])
    assert got.rank == s.rank - 1


def test_contract_internal_edge_of_quartet():
    q = quartet(1, 2, 3, 4)
    (alpha,) = internal_edges(q.blocks[0])
    assert contract_edge(q, 0, alpha) == star([1, 2, 3, 4])


def test_contract_two_unlabeled_vertices_merges_degrees():
    c = caterpillar([1, 2, 3, 4, 5])
    t = c.blocks[0]
    spine = [e for e in internal_edges(t)][0]
    got = contract_edge(c, 0, spine).blocks[0]
    assert sorted(got.degree(v) for v, labels in enumerate(got.vertices) if not labels) == [3, 4]


def test_contract_missing_edge():
    with pytest.raises(ValueError):
        contract_edge(star([1, 2, 3]), 0, (1, 2))


def test_contract_one_edge_tree_gives_single_vertex():
    f = XForest.tree(2, [[1], [2]], [(0, 1)])
    assert contract_edge(f, 0, (0, 1)) == XForest.tree(2, [[1, 2]])


def test_safe_deletions_examples():
    assert safe_deletions(star([1, 2, 3])) == []
    path = XForest.tree(3, [[2], [1], [3]], [(0, 1), (1, 2)])
    assert sorted(e for _, e in safe_deletions(path)) == [(0, 1), (1, 2)]
    for t in enumerate_trivalent(5):
        assert safe_deletions(t) == []


def test_lower_covers_examples():
    covers = lower_covers(star([1, 2, 3]))
    assert covers == {
        XForest.tree(3, [[a], [b], [c]], [(0, 1), (1, 2)]) for a, b, c in [(2, 1, 3), (1, 2, 3), (1, 3, 2)]
    }
    assert lower_covers(XForest.tree(4, [[1, 2, 3, 4]])) == set()
    assert len(lower_covers(quartet(1, 2, 3, 4))) == 5


def test_nni_neighbors_of_quartet():
    q = quartet(1, 2, 3, 4)
    (alpha,) = internal_edges(q.blocks[0])
    assert set(nni_neighbors(q, alpha)) == {quartet(1, 3, 2, 4), quartet(1, 4, 2, 3)}


def test_nni_three_arrangements():
    """Subtrees A = cherry {1,2}, B = 3 at u and C = 4, D = 5 at v; the three arrangements."""
    c = caterpillar([1, 2, 3, 4, 5])
    t = c.blocks[0]
    alpha = next(e for e in internal_edges(t) if frozenset({4, 5}) in t.split(e))
    a, b = nni_neighbors(c, alpha)
    assert [splits(f) for f in (c, a, b)] == [
        {frozenset({3, 4, 5}), frozenset({4, 5})},
        {frozenset({3, 4, 5}), frozenset({3, 5})},
        {frozenset({3, 4, 5}), frozenset({3, 4})},
    ]
    # each of the three reaches the other two across the same edge
    for f in (a, b):
        assert set(nni_neighbors(f, alpha)) == {c, a, b} - {f}


def test_nni_neighbors_are_distinct_trivalent():
    for f in enumerate_trivalent(5):
        for alpha in internal_edges(f.blocks[0]):
            one = nni_neighbors(f, alpha)
            assert all(g.is_trivalent_tree() for g in one)
            assert len({f, *one}) == 3


def test_nni_swap_involution():
    """Swapping back across the same edge restores the tree."""
    for f in enumerate_trivalent(5):
        t = f.blocks[0]
        for alpha in internal_edges(t):
            for g in nni_neighbors(f, alpha):
                # vertex indices are preserved by the swap, so alpha is still an edge of g
                assert f in set(nni_neighbors(g, alpha))


def test_nni_rejects_leaf_edge():
    q = quartet(1, 2, 3, 4)
    leaf_edge = next(e for e in q.blocks[0].edges if q.blocks[0].is_leaf_edge(e))
    with pytest.raises(ValueError):
        nni_neighbors(q, leaf_edge)


def test_enumerate_trivalent_counts():
    assert [len(enumerate_trivalent(n)) for n in range(3, 7)] == [1, 3, 15, 105]
    with pytest.raises(ValueError):
        enumerate_trivalent(2)


def test_enumerate_trivalent_recurrence():
    for n in range(4, 7):
        assert len(enumerate_trivalent(n)) == len(enumerate_trivalent(n - 1)) * (2 * (n - 1) - 3)


def compatible(a: frozenset[int], b: frozenset[int], ground: frozenset[int]) -> bool:
    return not (a & b) or a <= b or b <= a or not (ground - a - b)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_enumerate_trivalent_matches_split_system_oracle(n):
    """Trivalent trees correspond to maximal sets of n-3 pairwise compatible nontrivial splits."""
    ground = frozenset(range(1, n + 1))
    rest = sorted(ground - {1})
    sides = [
        frozenset(s)
        for k in range(2, n - 1)
        for s in combinations(rest, k)
        if 2 <= len(s) <= n - 2
    ]
    oracle = {
        frozenset(combo)
        for combo in combinations(sides, n - 3)
        if all(compatible(a, b, ground) for a, b in combinations(combo, 2))
    }
    ours = {splits(f) for f in enumerate_trivalent(n)}
    assert ours == oracle


def test_every_lower_cover_is_one_rank_down_and_valid(S):
    for f in S(5).forests:
        for c in lower_covers(f):
            assert validate(c) is None
            assert c.rank == f.rank - 1
        for bi, t in enumerate(f.blocks):
            for e in t.edges:
                assert validate(contract_edge(f, bi, e)) is None


def test_unsafe_deletions_are_invalid(S):
    """Deleting an edge outside safe_deletions never yields a valid forest (exhaustive, n <= 5)."""
    for n in (3, 4, 5):
        for f in S(n).forests:
            safe = set(safe_deletions(f))
            for bi, t in enumerate(f.blocks):
                for e in t.edges:
                    g = delete_edge(f, bi, e, require_safe=False)
                    assert (validate(g) is None) == ((bi, e) in safe)
                    if (bi, e) in safe:
                        assert g.rank == f.rank - 1
                        assert len(g.blocks) == len(f.blocks) + 1


def test_delete_edge_refuses_unsafe():
    with pytest.raises(ValueError):
        delete_edge(star([1, 2, 3]), 0, (0, 1))
