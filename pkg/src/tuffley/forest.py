"""X-trees and X-forests: validity, canonical codes and the local moves.

A forest is a tuple of blocks; every block is a tree whose vertices carry
(possibly empty) label sets.  The nonempty label sets over all vertices of a
forest partition ``{1..n}``.  Unlabeled vertices must have degree >= 3.

Forests are immutable.  Equality and hashing go through the canonical code,
so two forests compare equal iff they are isomorphic as labeled forests.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

Edge = tuple[int, int]


class InvalidForest(ValueError):
    pass


def _norm(edge: Sequence[int]) -> Edge:
    u, v = int(edge[0]), int(edge[1])
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class XTree:
    vertices: tuple[frozenset[int], ...]
    edges: tuple[Edge, ...]

    @classmethod
    def build(cls, vertices: Iterable[Iterable[int]], edges: Iterable[Sequence[int]] = ()) -> "XTree":
        verts = tuple(frozenset(int(x) for x in labels) for labels in vertices)
        return cls(verts, tuple(sorted(_norm(e) for e in edges)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def labels(self) -> frozenset[int]:
        return frozenset().union(*self.vertices)

    def label_vertex(self, x: int) -> int:
        for i, labels in enumerate(self.vertices):
            if x in labels:
                return i
        raise KeyError(x)

    def is_leaf_edge(self, edge: Sequence[int]) -> bool:
        u, v = _norm(edge)
        return self.degree(u) == 1 or self.degree(v) == 1

    def split(self, edge: Sequence[int]) -> tuple[frozenset[int], frozenset[int]]:
        """Label sets on the two sides of ``edge`` (side of the smaller endpoint first)."""
        u, v = _norm(edge)
        return self._side(u, v), self._side(v, u)

    def _side(self, start: int, blocked: int) -> frozenset[int]:
        seen = {start, blocked}
        stack = [start]
        out: set[int] = set()
        while stack:
            w = stack.pop()
            out |= self.vertices[w]
            for nb in self.adjacency[w]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return frozenset(out)

    def rooted_code(self, root: int, parent: int = -1, memo: dict | None = None) -> str:
        key = (root, parent)
        if memo is not None and key in memo:
            return memo[key]
        children = sorted(self.rooted_code(c, root, memo) for c in self.adjacency[root] if c != parent)
        labels = ",".join(str(x) for x in sorted(self.vertices[root]))
        out = "(" + labels + "".join(children) + ")"
        if memo is not None:
            memo[key] = out
        return out

    @cached_property
    def code(self) -> str:
        # subtree codes are shared between roots through the directed-edge memo
        memo: dict = {}
        return min(self.rooted_code(r, -1, memo) for r in range(len(self.vertices)))


@dataclass(frozen=True, eq=False)
class XForest:
    n: int
    blocks: tuple[XTree, ...]

    @classmethod
    def tree(cls, n: int, vertices: Iterable[Iterable[int]], edges: Iterable[Sequence[int]] = ()) -> "XForest":
        return cls(n, (XTree.build(vertices, edges),))

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[XTree]) -> "XForest":
        return cls(n, tuple(blocks))

    @property
    def rank(self) -> int:
        return sum(len(b.edges) for b in self.blocks)

    @cached_property
    def code(self) -> str:
        return canonicalize(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, XForest):
            return NotImplemented
        return self.n == other.n and self.code == other.code

    def __hash__(self) -> int:
        return hash((self.n, self.code))

    def __repr__(self) -> str:
        try:
            return f"XForest(n={self.n}, {self.code})"
        except InvalidForest:
            return f"XForest(n={self.n}, blocks={self.blocks!r})"

    def is_trivalent_tree(self) -> bool:
        if len(self.blocks) != 1:
            return False
        t = self.blocks[0]
        for i, labels in enumerate(t.vertices):
            d = t.degree(i)
            if labels and not (len(labels) == 1 and d == 1):
                return False
            if not labels and d != 3:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "blocks": [
                {"vertices": [sorted(v) for v in b.vertices], "edges": [list(e) for e in b.edges]}
                for b in self.blocks
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "XForest":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            int(data["n"]),
            tuple(XTree.build(b["vertices"], b.get("edges", ())) for b in data["blocks"]),
        )


def validate(f: XForest) -> str | None:
    """Return ``None`` if ``f`` is a valid X-forest, else the first violated invariant."""
    if f.n < 1:
        return "ground set must be nonempty"
    if not f.blocks:
        return "forest has no blocks"
    seen: list[int] = []
    for bi, t in enumerate(f.blocks):
        nv = len(t.vertices)
        if nv == 0:
            return f"block {bi}: tree has no vertices"
        if any(not (0 <= u < nv and 0 <= v < nv) for u, v in t.edges):
            return f"block {bi}: edge endpoint out of range"
        if any(u == v for u, v in t.edges):
            return f"block {bi}: self-loop"
        if len(set(t.edges)) != len(t.edges):
            return f"block {bi}: repeated edge"
        if len(t.edges) != nv - 1:
            return f"block {bi}: edge count is not |V| - 1"
        if not _connected(t):
            return f"block {bi}: tree is not connected"
        for v, labels in enumerate(t.vertices):
            if not labels and t.degree(v) < 3:
                return "unlabeled vertex degree < 3"
        for labels in t.vertices:
            seen.extend(labels)
    if sorted(seen) != list(range(1, f.n + 1)):
        return "labels not a partition"
    return None


def _connected(t: XTree) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        w = stack.pop()
        for nb in t.adjacency[w]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(t.vertices)


def is_valid(f: XForest) -> bool:
    return validate(f) is None


def canonicalize(f: XForest) -> str:
    """Canonical text code of a valid forest.

    Each tree is encoded by the lexicographically least rooted code over all
    roots; a rooted code is ``(`` + comma-joined labels + sorted child codes
    + ``)``.  The forest code is the concatenation of the sorted tree codes.
    """
    problem = validate(f)
    if problem is not None:
        raise InvalidForest(problem)
    return "".join(sorted(t.code for t in f.blocks))


def code_hex(code: str) -> str:
    return code.encode("ascii").hex()


def code_from_hex(text: str) -> str:
    return bytes.fromhex(text).decode("ascii")


def decode(code: str, n: int | None = None) -> XForest:
    """Rebuild a forest from its canonical code (vertex indices in preorder)."""
    pos = 0
    blocks: list[XTree] = []

    def parse_vertex(parent: int, verts: list[frozenset[int]], edges: list[Edge]) -> None:
        nonlocal pos
        if code[pos] != "(":
            raise ValueError(f"malformed code at {pos}: {code!r}")
        pos += 1
        start = pos
        while code[pos] not in "()":
            pos += 1
        text = code[start:pos]
        labels = frozenset(int(x) for x in text.split(",")) if text else frozenset()
        me = len(verts)
        verts.append(labels)
        if parent >= 0:
            edges.append((parent, me))
        while code[pos] == "(":
            parse_vertex(me, verts, edges)
        pos += 1

    try:
        while pos < len(code):
            verts: list[frozenset[int]] = []
            edges: list[Edge] = []
            parse_vertex(-1, verts, edges)
            blocks.append(XTree(tuple(verts), tuple(sorted(edges))))
    except IndexError:
        raise ValueError(f"truncated code: {code!r}") from None
    if n is None:
        n = max((x for b in blocks for v in b.vertices for x in v), default=0)
    return XForest(n, tuple(blocks))


def _replace_block(f: XForest, index: int, new: Iterable[XTree]) -> XForest:
    return XForest(f.n, f.blocks[:index] + tuple(new) + f.blocks[index + 1:])


def _check_edge(f: XForest, block: int, edge: Sequence[int]) -> Edge:
    if not 0 <= block < len(f.blocks):
        raise ValueError(f"no block {block}")
    e = _norm(edge)
    if e not in f.blocks[block].edges:
        raise ValueError(f"block {block} has no edge {e}")
    return e


def contract_edge(f: XForest, block: int, edge: Sequence[int]) -> XForest:
    """Contract ``edge`` of ``f.blocks[block]``; the merged vertex takes the union of labels."""
    u, v = _check_edge(f, block, edge)
    t = f.blocks[block]
    # v is folded into u; later indices shift down by one
    remap = [i if i < v else i - 1 for i in range(len(t.vertices))]
    remap[v] = remap[u]
    verts = [labels for i, labels in enumerate(t.vertices) if i != v]
    verts[remap[u]] = t.vertices[u] | t.vertices[v]
    edges = [(remap[a], remap[b]) for a, b in t.edges if (a, b) != (u, v)]
    return _replace_block(f, block, [XTree.build(verts, edges)])


def is_safe_deletion(t: XTree, edge: Sequence[int]) -> bool:
    u, v = _norm(edge)
    return all(t.vertices[w] or t.degree(w) > 3 for w in (u, v))


def delete_edge(f: XForest, block: int, edge: Sequence[int], *, require_safe: bool = True) -> XForest:
    """Delete ``edge``, splitting its block in two.

    With ``require_safe`` (the default) an unsafe deletion raises ``ValueError``.
    """
    u, v = _check_edge(f, block, edge)
    t = f.blocks[block]
    if require_safe and not is_safe_deletion(t, (u, v)):
        raise ValueError(f"deletion of {(u, v)} is not safe")
    remaining = [e for e in t.edges if e != (u, v)]
    return _replace_block(f, block, _components(t.vertices, remaining))


def _components(vertices: Sequence[frozenset[int]], edges: Sequence[Edge]) -> list[XTree]:
    adj: list[list[int]] = [[] for _ in vertices]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    comp = [-1] * len(vertices)
    out = []
    for s in range(len(vertices)):
        if comp[s] >= 0:
            continue
        members = []
        comp[s] = len(out)
        stack = [s]
        while stack:
            w = stack.pop()
            members.append(w)
            for nb in adj[w]:
                if comp[nb] < 0:
                    comp[nb] = comp[s]
                    stack.append(nb)
        members.sort()
        local = {w: i for i, w in enumerate(members)}
        sub_edges = [(local[a], local[b]) for a, b in edges if comp[a] == comp[s]]
        out.append(XTree.build([vertices[w] for w in members], sub_edges))
    return out


def safe_deletions(f: XForest) -> list[tuple[int, Edge]]:
    return [
        (bi, e)
        for bi, t in enumerate(f.blocks)
        for e in t.edges
        if is_safe_deletion(t, e)
    ]


def cover_moves(f: XForest) -> Iterator[tuple[str, int, Edge, XForest]]:
    """Yield ``(kind, block, edge, result)`` for every single contraction and safe deletion."""
    for bi, t in enumerate(f.blocks):
        for e in t.edges:
            yield "contract", bi, e, contract_edge(f, bi, e)
            if is_safe_deletion(t, e):
                yield "delete", bi, e, delete_edge(f, bi, e)


def lower_covers(f: XForest) -> set[XForest]:
    return {g for _, _, _, g in cover_moves(f)}


def internal_edges(t: XTree) -> list[Edge]:
    return [e for e in t.edges if not t.is_leaf_edge(e)]


def nni_neighbors(f: XForest, edge: Sequence[int]) -> tuple[XForest, XForest]:
    """The two trees reached from trivalent ``f`` by an NNI across internal ``edge``.

    Around ``edge = (u, v)`` the subtrees hanging at ``u`` are A, B and those
    at ``v`` are C, D (ordered by vertex index).  The first result swaps B
    with C, the second swaps B with D.
    """
    if not f.is_trivalent_tree():
        raise ValueError("NNI needs a trivalent tree")
    t = f.blocks[0]
    u, v = _check_edge(f, 0, edge)
    if t.is_leaf_edge((u, v)):
        raise ValueError(f"{(u, v)} is a leaf edge")
    _, b = [w for w in t.adjacency[u] if w != v]
    c, d = [w for w in t.adjacency[v] if w != u]
    base = set(t.edges) - {_norm((u, b))}
    swap_bc = (base - {_norm((v, c))}) | {_norm((u, c)), _norm((v, b))}
    swap_bd = (base - {_norm((v, d))}) | {_norm((u, d)), _norm((v, b))}
    return (
        XForest(f.n, (XTree.build(t.vertices, swap_bc),)),
        XForest(f.n, (XTree.build(t.vertices, swap_bd),)),
    )


def star(labels: Sequence[int], n: int | None = None) -> XForest:
    labels = list(labels)
    verts = [()] + [(x,) for x in labels]
    return XForest.tree(n or max(labels), verts, [(0, i) for i in range(1, len(verts))])


def caterpillar(leaves: Sequence[int], n: int | None = None) -> XForest:
    """Trivalent caterpillar: cherry ``leaves[0:2]``, one leaf per spine vertex, cherry ``leaves[-2:]``."""
    m = len(leaves)
    if m < 3:
        raise ValueError("a caterpillar needs at least 3 leaves")
    spine = m - 2
    verts: list[tuple[int, ...]] = [()] * spine
    edges = [(i, i + 1) for i in range(spine - 1)]
    attach = [0, 0] + list(range(1, spine - 1)) + [spine - 1, spine - 1]
    if m == 3:
        attach = [0, 0, 0]
    for leaf, s in zip(leaves, attach):
        edges.append((s, len(verts)))
        verts.append((leaf,))
    return XForest.tree(n or max(leaves), verts, edges)


def quartet(a: int, b: int, c: int, d: int, n: int | None = None) -> XForest:
    """The quartet tree ab|cd."""
    return caterpillar([a, b, c, d], n)


def enumerate_trivalent(n: int) -> list[XForest]:
    """All leaf-labeled trivalent trees on ``{1..n}``, sorted by canonical code."""
    if n < 3:
        raise ValueError("trivalent trees need n >= 3")
    trees = [star([1, 2, 3], 3)]
    for k in range(4, n + 1):
        grown: dict[str, XForest] = {}
        for f in trees:
            t = f.blocks[0]
            for a, b in t.edges:
                w, leaf = len(t.vertices), len(t.vertices) + 1
                verts = list(t.vertices) + [frozenset(), frozenset([k])]
                edges = [e for e in t.edges if e != (a, b)] + [(a, w), (w, b), (w, leaf)]
                g = XForest(k, (XTree.build(verts, edges),))
                grown.setdefault(g.code, g)
        trees = list(grown.values())
    if n == 3:
        return trees
    return [grown[c] for c in sorted(grown)]
