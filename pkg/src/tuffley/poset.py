"""The Tuffley poset S([n]) and its bounded version with 0^ and 1^ adjoined.

Elements are stored densely, sorted by ``(rank, canonical code)``, so the
index order is a linear extension.  Down-sets are Python ints used as
bitsets over element indices.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from . import config
from .forest import XForest, cover_moves, decode, enumerate_trivalent

BOTTOM = "0^"
TOP = "1^"


@dataclass
class Poset:
    n: int
    codes: list[str]
    covers: list[tuple[int, ...]]
    ranks: list[int]
    forests: list[XForest | None] = field(repr=False)
    bottom: int | None = None
    top: int | None = None

    def __post_init__(self) -> None:
        self.index = {c: i for i, c in enumerate(self.codes)}
        self.downsets = _downsets(self.covers)

    def __len__(self) -> int:
        return len(self.codes)

    @cached_property
    def upper(self) -> list[tuple[int, ...]]:
        up: list[list[int]] = [[] for _ in self.codes]
        for y, below in enumerate(self.covers):
            for x in below:
                up[x].append(y)
        return [tuple(u) for u in up]

    @cached_property
    def upsets(self) -> list[int]:
        return _downsets(self.upper)

    @property
    def bounded(self) -> bool:
        return self.bottom is not None and self.top is not None

    def leq(self, x: int, y: int) -> bool:
        return bool(self.downsets[y] >> x & 1)

    def lt(self, x: int, y: int) -> bool:
        return x != y and self.leq(x, y)

    def below(self, x: int) -> list[int]:
        """Indices of all elements <= x."""
        return bits(self.downsets[x])

    def maximal(self) -> list[int]:
        return [i for i, u in enumerate(self.upper) if not u]

    def minimal(self) -> list[int]:
        return [i for i, c in enumerate(self.covers) if not c]

    def coatoms(self) -> list[int]:
        if self.top is not None:
            return list(self.covers[self.top])
        return self.maximal()

    def forest(self, i: int) -> XForest:
        f = self.forests[i]
        if f is None:
            raise ValueError(f"element {i} ({self.codes[i]}) is not a forest")
        return f

    def interval(self, top: int) -> "Interval":
        return Interval(top, self.downsets[top])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "elements": list(self.codes),
            "covers": [[x, y] for y in range(len(self)) for x in self.covers[y]],
            "ranks": list(self.ranks),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict | str) -> "Poset":
        """Load a poset export; ``[x, y]`` in ``covers`` means x is covered by y."""
        if isinstance(data, str):
            data = json.loads(data)
        codes = list(data["elements"])
        below: list[list[int]] = [[] for _ in codes]
        for x, y in data["covers"]:
            below[y].append(x)
        forests: list[XForest | None] = []
        for c in codes:
            forests.append(None if c in (BOTTOM, TOP) else decode(c, data["n"]))
        return cls(
            n=int(data["n"]),
            codes=codes,
            covers=[tuple(sorted(b)) for b in below],
            ranks=[int(r) for r in data["ranks"]],
            forests=forests,
            bottom=codes.index(BOTTOM) if BOTTOM in codes else None,
            top=codes.index(TOP) if TOP in codes else None,
        )

    def to_dot(self, name: str = "hasse") -> str:
        lines = [f"graph {name} {{", "  rankdir=BT;", "  node [shape=box, fontsize=10];"]
        for r in sorted(set(self.ranks)):
            members = " ".join(f"n{i};" for i, ri in enumerate(self.ranks) if ri == r)
            lines.append(f"  {{ rank=same; {members} }}")
        for i, c in enumerate(self.codes):
            lines.append(f'  n{i} [label="{c}"];')
        for y, below in enumerate(self.covers):
            for x in below:
                lines.append(f"  n{x} -- n{y};")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Interval:
    """The principal interval [0^, top]."""

    top: int
    members: int

    def __contains__(self, x: int) -> bool:
        return bool(self.members >> x & 1)


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _downsets(covers: Sequence[Sequence[int]]) -> list[int]:
    """Bitset down-sets from a cover relation given as lower-cover lists."""
    m = len(covers)
    pending = [len(c) for c in covers]
    up: list[list[int]] = [[] for _ in range(m)]
    for y, below in enumerate(covers):
        for x in below:
            up[x].append(y)
    down = [1 << i for i in range(m)]
    queue = deque(i for i in range(m) if pending[i] == 0)
    done = 0
    while queue:
        x = queue.popleft()
        done += 1
        for y in up[x]:
            down[y] |= down[x]
            pending[y] -= 1
            if pending[y] == 0:
                queue.append(y)
    if done != m:
        raise ValueError("cover relation contains a cycle")
    return down


def closure(seeds: Iterable[XForest], order: str = "bfs") -> dict[str, tuple[XForest, set[str]]]:
    """Downward closure under single moves: code -> (forest, codes of its lower covers).

    ``order`` picks the traversal ("bfs" or "dfs"); the result does not depend on it.
    """
    found: dict[str, tuple[XForest, set[str]]] = {}
    todo: deque[XForest] = deque()
    for f in seeds:
        if f.code not in found:
            found[f.code] = (f, set())
            todo.append(f)
    pop = todo.popleft if order == "bfs" else todo.pop
    while todo:
        f = pop()
        below = found[f.code][1]
        for _, _, _, g in cover_moves(f):
            below.add(g.code)
            if g.code not in found:
                found[g.code] = (g, set())
                todo.append(g)
    return found


def _from_closure(n: int, found: dict[str, tuple[XForest, set[str]]]) -> Poset:
    codes = sorted(found, key=lambda c: (found[c][0].rank, c))
    index = {c: i for i, c in enumerate(codes)}
    return Poset(
        n=n,
        codes=codes,
        covers=[tuple(sorted(index[d] for d in found[c][1])) for c in codes],
        ranks=[found[c][0].rank for c in codes],
        forests=[found[c][0] for c in codes],
    )


def build_tuffley(n: int, cap: int | None = None, order: str = "bfs") -> Poset:
    """S([n]) without bounds, generated top-down from the trivalent trees."""
    cap = config.max_n() if cap is None else cap
    if n < 3:
        raise ValueError("S([n]) is built for n >= 3")
    if n > cap:
        raise config.CapExceeded(f"n={n} exceeds max_n={cap}")
    seeds = enumerate_trivalent(n)
    if order == "dfs":
        seeds = seeds[::-1]
    return _from_closure(n, closure(seeds, order))


def augment(p: Poset) -> Poset:
    """Adjoin 0^ below the rank-0 elements and 1^ above the maximal ones."""
    if p.bounded:
        return p
    m = len(p)
    maximal = [i + 1 for i in p.maximal()]
    covers = [()] + [tuple(x + 1 for x in c) if c else (0,) for c in p.covers] + [tuple(maximal)]
    return Poset(
        n=p.n,
        codes=[BOTTOM] + list(p.codes) + [TOP],
        covers=covers,
        ranks=[-1] + list(p.ranks) + [max(p.ranks) + 1],
        forests=[None] + list(p.forests) + [None],
        bottom=0,
        top=m + 1,
    )


def bounded_tuffley(n: int, cap: int | None = None) -> Poset:
    return augment(build_tuffley(n, cap))


def common_lower_covers(p: Poset, a: int, b: int) -> set[int]:
    if a == b:
        raise ValueError("common_lower_covers needs two distinct coatoms")
    return set(p.covers[a]) & set(p.covers[b])


def _chain_extremes(p: Poset):
    """Per element: (shortest, longest) chain length from a minimal element, with predecessors."""
    m = len(p)
    short = [0] * m
    long = [0] * m
    short_from = [-1] * m
    long_from = [-1] * m
    for y in _topological(p):
        if not p.covers[y]:
            continue
        xs = p.covers[y]
        s = min(xs, key=lambda x: short[x])
        l = max(xs, key=lambda x: long[x])
        short[y], short_from[y] = short[s] + 1, s
        long[y], long_from[y] = long[l] + 1, l
    return short, long, short_from, long_from


def _topological(p: Poset) -> list[int]:
    pending = [len(c) for c in p.covers]
    queue = deque(i for i in range(len(p)) if pending[i] == 0)
    out = []
    while queue:
        x = queue.popleft()
        out.append(x)
        for y in p.upper[x]:
            pending[y] -= 1
            if pending[y] == 0:
                queue.append(y)
    return out


def _walk(end: int, back: list[int]) -> list[int]:
    chain = [end]
    while back[chain[-1]] >= 0:
        chain.append(back[chain[-1]])
    return chain[::-1]


def check_graded(p: Poset) -> tuple[list[int], list[int]] | None:
    """``None`` if all maximal chains have equal length, else two chains of different lengths."""
    short, long, short_from, long_from = _chain_extremes(p)
    tops = p.maximal()
    lo = min(tops, key=lambda t: short[t])
    hi = max(tops, key=lambda t: long[t])
    if short[lo] == long[hi]:
        return None
    return _walk(lo, short_from), _walk(hi, long_from)


def check_thin(p: Poset) -> tuple[int, int] | None:
    """``None`` if every interval [x, z] with x < y < z a saturated chain has 4 elements.

    Intervals ending at an adjoined 1^ are skipped: a ridge lies in one or
    three facets, so [w, 1^] has 3 or 5 elements by design.
    """
    ups = p.upsets
    for x in range(len(p)):
        for y in p.upper[x]:
            for z in p.upper[y]:
                if z == p.top:
                    continue
                if (p.downsets[z] & ups[x]).bit_count() != 4:
                    return x, z
    return None


def maximal_chains(p: Poset) -> Iterator[tuple[int, ...]]:
    """All maximal chains, each listed bottom-up."""
    def extend(chain: list[int]) -> Iterator[tuple[int, ...]]:
        ups = p.upper[chain[-1]]
        if not ups:
            yield tuple(chain)
            return
        for y in ups:
            chain.append(y)
            yield from extend(chain)
            chain.pop()

    for x in p.minimal():
        yield from extend([x])


def count_maximal_chains(p: Poset) -> int:
    ways = [0] * len(p)
    for y in _topological(p):
        ways[y] = sum(ways[x] for x in p.covers[y]) if p.covers[y] else 1
    return sum(ways[t] for t in p.maximal())


def export_order_complex(p: Poset) -> list[tuple[int, ...]]:
    """Facets of the order complex of S(X): maximal chains as sorted index tuples."""
    if len(p) == 0:
        raise ValueError("empty poset")
    if p.bounded:
        raise ValueError("export the order complex of S(X), not of the bounded poset")
    return sorted(tuple(sorted(c)) for c in maximal_chains(p))


def format_facets(facets: Sequence[Sequence[int]]) -> str:
    dim = len(facets[0]) - 1 if facets else -1
    lines = [f"# dim={dim}"] + [" ".join(str(i) for i in f) for f in facets]
    return "\n".join(lines) + "\n"
