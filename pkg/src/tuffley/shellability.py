"""Recursive coatom orderings of bounded posets.

Two deciders share one extension test:

* ``condition_ii_feasible`` runs a subset DP over coatom sets using only the
  gluing condition (ii).  The test depends on the already-placed coatoms only
  as a set, so reachability over bitmasks is exact.
* ``rco_search`` adds the recursive condition (i), descending into each
  interval [0^, C] with the required prefix of shared covered elements.

``replay_certificate`` re-checks an ordering with plain quantifier loops and
its own down-set computation, so it does not trust either decider.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import config
from .config import Budget, CapExceeded
from .poset import Poset

VARIANTS = ("nonstrict", "strict")


@dataclass
class RcoCertificate:
    verdict: str
    variant: str
    top: int
    required_prefix: tuple[int, ...] = ()
    ordering: list[tuple[int, "RcoCertificate | None"]] = field(default_factory=list)
    maximal_reachable: list[tuple[int, ...]] = field(default_factory=list)
    reason: str = ""

    @property
    def exists(self) -> bool:
        return self.verdict == "exists"

    def coatom_order(self) -> list[int]:
        return [c for c, _ in self.ordering]

    def to_json(self, p: Poset) -> dict:
        out: dict = {"verdict": self.verdict, "variant": self.variant, "top": p.codes[self.top]}
        if self.required_prefix:
            out["required_prefix"] = sorted(p.codes[c] for c in self.required_prefix)
        if self.exists:
            out["ordering"] = [
                {"coatom": p.codes[c], "interval_certificate": sub.to_json(p) if sub is not None else None}
                for c, sub in self.ordering
            ]
        else:
            out["maximal_reachable"] = sorted(sorted(p.codes[c] for c in s) for s in self.maximal_reachable)
            if self.reason:
                out["reason"] = self.reason
        return out

    def dumps(self, p: Poset) -> str:
        return json.dumps(self.to_json(p), sort_keys=True, indent=1)


class ConditionIIOracle:
    """Per-interval tables for the extension test of condition (ii)."""

    def __init__(self, p: Poset, top: int | None = None, variant: str = "nonstrict"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.p = p
        self.variant = variant
        self.top = p.top if top is None else top
        self.coatoms = sorted(p.covers[self.top], key=lambda c: p.codes[c])
        self.pos = {c: i for i, c in enumerate(self.coatoms)}
        self.covered_by: dict[int, int] = {}
        for c in self.coatoms:
            for z in p.covers[c]:
                self.covered_by[z] = self.covered_by.get(z, 0) | 1 << self.pos[c]
        if variant == "nonstrict":
            self.reach = {z: p.downsets[z] for z in self.covered_by}
        else:
            self.reach = {z: p.downsets[z] & ~(1 << z) for z in self.covered_by}

    def mask(self, members: Iterable[int]) -> int:
        m = 0
        for c in members:
            m |= 1 << self.pos[c]
        return m

    def members(self, mask: int) -> list[int]:
        return [c for i, c in enumerate(self.coatoms) if mask >> i & 1]

    def union_down(self, mask: int) -> int:
        u = 0
        for c in self.members(mask):
            u |= self.p.downsets[c]
        return u

    def shared(self, c: int, mask: int) -> list[int]:
        """Covered elements of ``c`` that some placed coatom also covers."""
        return [z for z in self.p.covers[c] if self.covered_by[z] & mask]

    def valid(self, c: int, mask: int, union: int | None = None) -> bool:
        if union is None:
            union = self.union_down(mask)
        need = self.p.downsets[c] & union
        if not need:
            return True
        got = 0
        for z in self.shared(c, mask):
            got |= self.reach[z]
        return need & ~got == 0


def valid_extension(p: Poset, c: int, placed: Iterable[int], variant: str = "nonstrict", top: int | None = None) -> bool:
    """Can coatom ``c`` follow the coatoms ``placed`` under condition (ii)?"""
    oracle = ConditionIIOracle(p, top, variant)
    placed = list(placed)
    if c in placed:
        raise ValueError("c is already placed")
    return oracle.valid(c, oracle.mask(placed))


def _maximal_masks(reach: np.ndarray, t: int) -> list[int]:
    """Reachable masks with no reachable proper superset (superset-OR transform)."""
    sup = reach.copy()
    for i in range(t):
        view = sup.reshape(-1, 2, 1 << i)
        view[:, 0, :] |= view[:, 1, :]
    strict = np.zeros_like(reach)
    for i in range(t):
        s = strict.reshape(-1, 2, 1 << i)
        s[:, 0, :] |= sup.reshape(-1, 2, 1 << i)[:, 1, :]
    return [int(m) for m in np.flatnonzero(reach & ~strict)]


def _condition_ii_dp(
    oracle: ConditionIIOracle,
    prefix_mask: int,
    cap: int,
    budget: Budget,
) -> tuple[bool, list[int], list[int]]:
    """Subset DP. Returns (full set reachable, witness order, maximal reachable masks)."""
    t = len(oracle.coatoms)
    if t > cap:
        raise CapExceeded(f"{t} coatoms exceeds the DP cap of {cap}")
    full = (1 << t) - 1
    reach = np.zeros(1 << t, dtype=bool)
    reach[0] = True
    parent: dict[int, tuple[int, int]] = {}
    level = {0: 0}
    for size in range(t):
        budget.check(f"in condition (ii) DP at level {size}", {"level": size, "reachable": int(reach.sum())})
        nxt: dict[int, int] = {}
        for mask, union in level.items():
            pool = prefix_mask if mask & prefix_mask != prefix_mask else full
            for i in range(t):
                bit = 1 << i
                if not pool & bit or mask & bit:
                    continue
                new = mask | bit
                if new in nxt:
                    continue
                c = oracle.coatoms[i]
                if oracle.valid(c, mask, union):
                    nxt[new] = union | oracle.p.downsets[c]
                    parent[new] = (mask, i)
                    reach[new] = True
        level = nxt
    if reach[full]:
        order = []
        m = full
        while m:
            m, i = parent[m]
            order.append(oracle.coatoms[i])
        return True, order[::-1], []
    return False, [], _maximal_masks(reach, t)


def condition_ii_feasible(
    p: Poset,
    variant: str = "nonstrict",
    top: int | None = None,
    required_prefix: Iterable[int] = (),
    cap: int = config.DEFAULT_DP_COATOM_CAP,
    budget: Budget | None = None,
) -> RcoCertificate:
    """Decide whether some coatom ordering of [0^, top] satisfies condition (ii)."""
    oracle = ConditionIIOracle(p, top, variant)
    prefix = tuple(sorted(required_prefix))
    ok, order, maximal = _condition_ii_dp(oracle, oracle.mask(prefix), cap, budget or config.UNLIMITED)
    if ok:
        return RcoCertificate("exists", variant, oracle.top, prefix, [(c, None) for c in order])
    return RcoCertificate(
        "not-exists", variant, oracle.top, prefix,
        maximal_reachable=[tuple(oracle.members(m)) for m in maximal],
        reason="condition (ii)",
    )


class RcoSearch:
    """Memoized decision procedure for full recursive coatom orderings."""

    def __init__(
        self,
        p: Poset,
        variant: str = "nonstrict",
        budget: Budget | None = None,
        cap: int = config.DEFAULT_DP_COATOM_CAP,
        max_depth: int = 64,
        seed: int | None = None,
    ):
        if not p.bounded:
            raise ValueError("rco_search needs a bounded poset")
        self.p = p
        self.variant = variant
        self.budget = budget or config.UNLIMITED
        self.cap = cap
        self.max_depth = max_depth
        self.rng = random.Random(seed) if seed is not None else None
        self.memo: dict[tuple[int, frozenset[int]], RcoCertificate] = {}
        self.nodes = 0

    def search(self, top: int, prefix: Iterable[int] = (), depth: int = 0) -> RcoCertificate:
        prefix = frozenset(prefix)
        key = (top, prefix)
        if key in self.memo:
            return self.memo[key]
        if depth > self.max_depth:
            raise CapExceeded(f"recursion depth {depth} exceeds {self.max_depth}")
        cert = self._decide(top, prefix, depth)
        self.memo[key] = cert
        return cert

    def _decide(self, top: int, prefix: frozenset[int], depth: int) -> RcoCertificate:
        p = self.p
        pre = tuple(sorted(prefix))
        if p.ranks[top] - p.ranks[p.bottom] <= 1:
            return RcoCertificate("exists", self.variant, top, pre, [(c, None) for c in p.covers[top]])
        oracle = ConditionIIOracle(p, top, self.variant)
        prefix_mask = oracle.mask(prefix)
        ok, _, maximal = _condition_ii_dp(oracle, prefix_mask, self.cap, self.budget)
        if not ok:
            return RcoCertificate(
                "not-exists", self.variant, top, pre,
                maximal_reachable=[tuple(oracle.members(m)) for m in maximal],
                reason="condition (ii)",
            )
        t = len(oracle.coatoms)
        full = (1 << t) - 1
        dead: set[int] = set()
        order: list[tuple[int, RcoCertificate]] = []
        candidates = list(range(t))
        if self.rng is not None:
            self.rng.shuffle(candidates)

        def extend(mask: int, union: int) -> bool:
            if mask == full:
                return True
            if mask in dead:
                return False
            self.nodes += 1
            self.budget.check("in recursive search", {"nodes": self.nodes, "memo": len(self.memo)})
            pool = prefix_mask if mask & prefix_mask != prefix_mask else full
            for i in candidates:
                bit = 1 << i
                if not pool & bit or mask & bit:
                    continue
                c = oracle.coatoms[i]
                if not oracle.valid(c, mask, union):
                    continue
                sub = self.search(c, oracle.shared(c, mask) if mask else (), depth + 1)
                if not sub.exists:
                    continue
                order.append((c, sub))
                if extend(mask | bit, union | p.downsets[c]):
                    return True
                order.pop()
            dead.add(mask)
            return False

        if extend(0, 0):
            return RcoCertificate("exists", self.variant, top, pre, list(order))
        return RcoCertificate("not-exists", self.variant, top, pre, reason="condition (i)")


def rco_search(
    p: Poset,
    top: int | None = None,
    required_prefix: Iterable[int] = (),
    variant: str = "nonstrict",
    budget: Budget | None = None,
    seed: int | None = None,
) -> RcoCertificate:
    s = RcoSearch(p, variant, budget, seed=seed)
    return s.search(p.top if top is None else top, required_prefix)


class _NaiveOrder:
    """Order relation rebuilt from the cover lists as plain sets."""

    def __init__(self, p: Poset):
        self.p = p
        self._down: dict[int, frozenset[int]] = {}

    def down(self, x: int) -> frozenset[int]:
        if x not in self._down:
            out = {x}
            stack = [x]
            while stack:
                for w in self.p.covers[stack.pop()]:
                    if w not in out:
                        out.add(w)
                        stack.append(w)
            self._down[x] = frozenset(out)
        return self._down[x]

    def lt(self, x: int, y: int) -> bool:
        return x != y and x in self.down(y)


def condition_ii_violation(
    p: Poset, ordering: Sequence[int], variant: str = "nonstrict", naive: _NaiveOrder | None = None
) -> tuple[int, int, int] | None:
    """First (i, j, y) for which condition (ii) fails along ``ordering``, by direct quantification."""
    naive = naive or _NaiveOrder(p)
    for j in range(1, len(ordering)):
        cj = ordering[j]
        for i in range(j):
            ci = ordering[i]
            for y in sorted(naive.down(ci) & naive.down(cj)):
                if not (naive.lt(y, ci) and naive.lt(y, cj)):
                    continue
                found = False
                for k in range(j):
                    for z in p.covers[ordering[k]]:
                        if z not in p.covers[cj]:
                            continue
                        if (naive.lt(y, z) if variant == "strict" else (y == z or naive.lt(y, z))):
                            found = True
                            break
                    if found:
                        break
                if not found:
                    return i, j, y
    return None


def replay_certificate(cert: RcoCertificate, p: Poset, naive: _NaiveOrder | None = None) -> str | None:
    """Re-verify an ``exists`` certificate from scratch; ``None`` or the first violation."""
    naive = naive or _NaiveOrder(p)
    done: set[int] = set()

    def check(c: RcoCertificate, top: int, prefix: frozenset[int], where: str) -> str | None:
        if c.top != top:
            return f"{where}: certificate is for {p.codes[c.top]}, expected {p.codes[top]}"
        if not c.exists:
            return f"{where}: verdict is {c.verdict}"
        order = c.coatom_order()
        if sorted(order) != sorted(p.covers[top]) or len(set(order)) != len(order):
            return f"{where}: ordering is not a permutation of the coatoms"
        if set(order[: len(prefix)]) != prefix:
            return f"{where}: required prefix does not come first"
        if id(c) in done:
            return None
        if p.ranks[top] - p.ranks[p.bottom] <= 1:
            done.add(id(c))
            return None
        bad = condition_ii_violation(p, order, c.variant, naive)
        if bad is not None:
            i, j, y = bad
            return (
                f"{where}: condition (ii) fails for positions {i} < {j} "
                f"({p.codes[order[i]]}, {p.codes[order[j]]}) at y={p.codes[y]}"
            )
        for j, (cj, sub) in enumerate(c.ordering):
            need = frozenset(
                z for z in p.covers[cj] if any(z in p.covers[ck] for ck in order[:j])
            ) if j else frozenset()
            if sub is None:
                if p.ranks[cj] - p.ranks[p.bottom] > 1:
                    return f"{where}: missing interval certificate for {p.codes[cj]}"
                continue
            msg = check(sub, cj, need, f"{where} > {p.codes[cj]}")
            if msg:
                return msg
        done.add(id(c))
        return None

    return check(cert, cert.top, frozenset(cert.required_prefix), p.codes[cert.top])
