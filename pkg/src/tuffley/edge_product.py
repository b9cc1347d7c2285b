"""Edge-product coordinates: edge weights in [0, 1] to pairwise path products."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .forest import Edge, XForest, XTree, validate

TOL = 1e-12


def label_pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(1, n + 1), 2))


@dataclass(frozen=True)
class EdgeWeightVector:
    tree: XForest
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if len(self.tree.blocks) != 1:
            raise ValueError("edge weights live on a single tree")
        if w.shape != (len(self.tree.blocks[0].edges),):
            raise ValueError(f"expected {len(self.tree.blocks[0].edges)} weights, got shape {w.shape}")
        if not np.all((w >= 0.0) & (w <= 1.0)):
            raise ValueError("edge weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class EdgeProductVector:
    n: int
    values: np.ndarray

    def __getitem__(self, pair: tuple[int, int]) -> float:
        x, y = sorted(pair)
        # position of (x, y) in lexicographic pair order
        i = (x - 1) * (2 * self.n - x) // 2 + (y - x - 1)
        return float(self.values[i])

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(label_pairs(self.n), self.values.tolist()))


def path_edges(t: XTree, x: int, y: int) -> list[Edge]:
    """Edges on the unique path between the vertices carrying labels x and y."""
    if x == y:
        raise ValueError("need two distinct labels")
    try:
        src, dst = t.label_vertex(x), t.label_vertex(y)
    except KeyError as exc:
        raise KeyError(f"label {exc.args[0]} not in tree") from None
    prev = {src: -1}
    stack = [src]
    while stack:
        v = stack.pop()
        for w in t.adjacency[v]:
            if w not in prev:
                prev[w] = v
                stack.append(w)
    if dst not in prev:
        raise ValueError(f"labels {x} and {y} are not connected")
    out = []
    v = dst
    while prev[v] >= 0:
        out.append(tuple(sorted((v, prev[v]))))
        v = prev[v]
    return out[::-1]


def lambda_forest(f: XForest, weights: Sequence[Sequence[float]]) -> EdgeProductVector:
    """Path products over a forest: 0 across blocks, empty product 1 within one vertex."""
    where: dict[int, int] = {}
    edge_w: list[dict[Edge, float]] = []
    for bi, (t, w) in enumerate(zip(f.blocks, weights)):
        for x in t.labels:
            where[x] = bi
        edge_w.append(dict(zip(t.edges, (float(v) for v in w))))
    vals = np.zeros(len(label_pairs(f.n)))
    for i, (x, y) in enumerate(label_pairs(f.n)):
        if where[x] != where[y]:
            continue
        t = f.blocks[where[x]]
        if t.label_vertex(x) == t.label_vertex(y):
            vals[i] = 1.0
        else:
            vals[i] = np.prod([edge_w[where[x]][e] for e in path_edges(t, x, y)])
    return EdgeProductVector(f.n, vals)


def lambda_T(w: EdgeWeightVector | XForest, weights: Sequence[float] | None = None) -> EdgeProductVector:
    if isinstance(w, XForest):
        w = EdgeWeightVector(w, np.asarray(weights, dtype=float))
    return lambda_forest(w.tree, [w.weights])


@dataclass
class Degeneration:
    forest: XForest | None
    surviving: list[np.ndarray]
    unsafe: str | None
    max_abs_diff: float | None

    @property
    def agrees(self) -> bool:
        return self.max_abs_diff is not None and self.max_abs_diff <= TOL


def degenerate(w: EdgeWeightVector) -> Degeneration:
    """Contract weight-1 edges, delete weight-0 edges, and compare products.

    The deletions are safe as a set exactly when the resulting forest is a
    valid X-forest; otherwise the result is flagged and no forest returned.
    """
    t = w.tree.blocks[0]
    parent = list(range(len(t.vertices)))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e, val in zip(t.edges, w.weights):
        if val == 1.0:
            parent[find(e[0])] = find(e[1])
    roots = sorted({find(v) for v in range(len(t.vertices))})
    new_index = {r: i for i, r in enumerate(roots)}
    verts = [frozenset()] * len(roots)
    for v, labels in enumerate(t.vertices):
        verts[new_index[find(v)]] = verts[new_index[find(v)]] | labels
    kept: list[tuple[Edge, float]] = []
    for e, val in zip(t.edges, w.weights):
        if val == 1.0 or val == 0.0:
            continue
        a, b = new_index[find(e[0])], new_index[find(e[1])]
        kept.append(((min(a, b), max(a, b)), float(val)))
    forest, surviving = _split_weighted(w.tree.n, verts, kept)
    problem = validate(forest)
    if problem is not None:
        return Degeneration(None, [], problem, None)
    expected = lambda_T(w).values
    got = lambda_forest(forest, surviving).values
    return Degeneration(forest, surviving, None, float(np.max(np.abs(expected - got))))


def _split_weighted(
    n: int, verts: Sequence[frozenset[int]], kept: Sequence[tuple[Edge, float]]
) -> tuple[XForest, list[np.ndarray]]:
    """Connected components of a weighted graph as blocks with aligned weight arrays."""
    comp = list(range(len(verts)))

    def find(v: int) -> int:
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for (a, b), _ in kept:
        comp[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for v in range(len(verts)):
        groups.setdefault(find(v), []).append(v)
    blocks, weights = [], []
    for members in sorted(groups.values()):
        local = {v: i for i, v in enumerate(members)}
        pairs = sorted(
            ((min(local[a], local[b]), max(local[a], local[b])), val)
            for (a, b), val in kept
            if a in local
        )
        blocks.append(XTree(tuple(verts[v] for v in members), tuple(e for e, _ in pairs)))
        weights.append(np.array([val for _, val in pairs]))
    return XForest(n, tuple(blocks)), weights


def edge_name(t: XTree, e: Edge) -> str:
    """Split notation for an edge, smaller side first, e.g. ``1.2|3.4``."""
    a, b = (sorted(side) for side in t.split(e))
    first, second = sorted((a, b), key=lambda s: (len(s), s))
    return ".".join(map(str, first)) + "|" + ".".join(map(str, second))


def parse_weights_csv(t: XForest, text: str) -> list[EdgeWeightVector]:
    """Weight samples from CSV whose header names every edge in split notation."""
    tree = t.blocks[0]
    names = {edge_name(tree, e): i for i, e in enumerate(tree.edges)}
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("weights file is empty")
    header = [h.strip() for h in rows[0]]
    if sorted(header) != sorted(names):
        raise ValueError(f"weight columns {sorted(header)} do not match tree edges {sorted(names)}")
    out = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"line {line}: expected {len(header)} values")
        w = np.zeros(len(header))
        for name, cell in zip(header, row):
            try:
                w[names[name]] = float(cell)
            except ValueError:
                raise ValueError(f"line {line}: {cell!r} is not a number") from None
        try:
            out.append(EdgeWeightVector(t, w))
        except ValueError as exc:
            raise ValueError(f"line {line}: {exc}") from None
    return out


def products_csv(samples: Iterable[EdgeWeightVector], n: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{x}-{y}" for x, y in label_pairs(n)])
    for w in samples:
        writer.writerow([repr(float(v)) for v in lambda_T(w).values])
    return buf.getvalue()


def subdivide(t: XForest, weights: Sequence[float], edge_index: int, split: float) -> tuple[XForest, np.ndarray]:
    """Replace edge ``edge_index`` by a path of two edges whose weights multiply to the original.

    The middle vertex is unlabeled of degree 2, so the result is a plain
    weighted tree rather than a valid X-tree; only path products are defined.
    """
    tree = t.blocks[0]
    a, b = tree.edges[edge_index]
    w = float(weights[edge_index])
    mid = len(tree.vertices)
    w1 = split
    w2 = w / split if split > 0 else 0.0
    pairs = [(e, float(v)) for i, (e, v) in enumerate(zip(tree.edges, weights)) if i != edge_index]
    pairs += [((a, mid), w1), ((b, mid), w2)]
    pairs.sort()
    new = XTree(tuple(tree.vertices) + (frozenset(),), tuple(e for e, _ in pairs))
    return XForest(t.n, (new,)), np.array([v for _, v in pairs])
