"""The chain of checks that rules out a recursive coatom ordering, as one report."""
from __future__ import annotations

from dataclasses import dataclass, field

from .config import Budget
from .nni import (
    CriticalContext,
    NNIGraph,
    build_nni_graph,
    canonical_cycle_K,
    classify_cycle,
    coatoms_above,
    cycle_indices,
    find_critical_triplets,
    induced_subgraph,
    verify_context,
)
from .poset import Poset, bounded_tuffley
from .shellability import condition_ii_feasible, replay_certificate, rco_search


class VerificationFailed(RuntimeError):
    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class TripletSection:
    context: CriticalContext
    above: list[int]
    edges: list[tuple[int, int]]
    checks: dict[str, dict | None]

    def to_json(self, p: Poset) -> dict:
        return {
            "C_i": p.codes[self.context.i],
            "C_j": p.codes[self.context.j],
            "C_k": p.codes[self.context.k],
            "x": self.context.x,
            "F_ijk": p.codes[self.context.F_ijk],
            "coatoms_above": sorted(p.codes[c] for c in self.above),
            "induced_edges": sorted(sorted((p.codes[a], p.codes[b])) for a, b in self.edges),
            "checks": {name: "ok" if w is None else w for name, w in sorted(self.checks.items())},
        }


@dataclass
class ObstructionReport:
    n: int
    variant: str
    cycle: list[int] = field(default_factory=list)
    cycle_kind: str = ""
    triplets: list[TripletSection] = field(default_factory=list)
    verdict: str = ""
    obstruction: list[int] = field(default_factory=list)
    note: str = ""

    def to_json(self, p: Poset) -> dict:
        return {
            "n": self.n,
            "variant": self.variant,
            "cycle_K": [p.codes[c] for c in self.cycle],
            "cycle_kind": self.cycle_kind,
            "triplets": [t.to_json(p) for t in self.triplets],
            "verdict": self.verdict,
            "obstruction": sorted(p.codes[c] for c in self.obstruction),
            "note": self.note,
        }

    def lines(self, p: Poset) -> list[str]:
        out = [f"n={self.n} variant={self.variant}"]
        if self.note:
            out.append(self.note)
        if self.cycle:
            out.append(f"(a) K: {len(self.cycle)} coatoms, {self.cycle_kind}")
        for t in self.triplets:
            ok = all(w is None for w in t.checks.values())
            out.append(
                f"(b) C_i={p.codes[t.context.i]} x={t.context.x}: "
                f"{len(t.above)} coatoms above F_ijk, {len(t.edges)} edges"
            )
            out.append(f"(c)   lemma checks {'ok' if ok else 'FAILED'}")
        out.append(f"(d) verdict: {self.verdict}")
        if self.obstruction:
            out.append(f"    maximal reachable subset of size {len(self.obstruction)}")
        return out


def _triplet_shape(g: NNIGraph, ctx: CriticalContext, above: list[int]) -> str | None:
    """None if the induced graph is C_i joined to all, C_j/C_k apart, plus a matching to the rest."""
    sub = g.restrict(above)
    others = [c for c in above if c != ctx.i]
    if any(not sub.adjacent(ctx.i, c) for c in others):
        return "C_i is not adjacent to every other coatom above F_ijk"
    if sub.adjacent(ctx.j, ctx.k):
        return "C_j and C_k are adjacent"
    rest = [c for c in others if c not in (ctx.j, ctx.k)]
    outer = [(a, b) for (a, b) in sub.edges if ctx.i not in (a, b)]
    touched = sorted(v for e in outer for v in e)
    if len(outer) != len(rest) or touched != sorted([ctx.j, ctx.k, *rest]):
        return f"edges away from C_i {outer} do not pair C_j and C_k with the remaining coatoms"
    return None


def obstruction_report(
    n: int,
    p: Poset | None = None,
    variant: str = "nonstrict",
    budget: Budget | None = None,
) -> tuple[ObstructionReport, Poset]:
    """Run the obstruction argument end to end; raise VerificationFailed on any broken step."""
    p = p or bounded_tuffley(n)
    report = ObstructionReport(n, variant)
    if n < 5:
        if find_critical_triplets(p):
            raise VerificationFailed(f"unexpected critical triplets at n={n}")
        cert = rco_search(p, variant=variant, budget=budget)
        problem = replay_certificate(cert, p) if cert.exists else "no ordering found"
        if problem:
            raise VerificationFailed(f"n={n}: {problem}", cert)
        report.verdict = cert.verdict
        report.note = "no critical triplets; RCO exists"
        return report, p

    g = build_nni_graph(p)
    report.cycle = cycle_indices(p, canonical_cycle_K(n))
    report.cycle_kind = classify_cycle(g, p, report.cycle)
    if report.cycle_kind != "nontrivial":
        raise VerificationFailed(f"K classified as {report.cycle_kind}", report.cycle)

    contexts = find_critical_triplets(p)
    for pos, ci in enumerate(report.cycle):
        nb = {report.cycle[pos - 1], report.cycle[(pos + 1) % len(report.cycle)]}
        match = [c for c in contexts if c.i == ci and {c.j, c.k} == nb]
        if len(match) != 1:
            raise VerificationFailed(f"expected one critical triplet for K vertex {p.codes[ci]}, got {len(match)}")
        ctx = match[0]
        above = coatoms_above(p, ctx.F_ijk)
        checks = verify_context(ctx, p, g)
        shape = _triplet_shape(g, ctx, above)
        checks["induced_shape"] = None if shape is None else {"problem": shape}
        sub = induced_subgraph(g, p, ctx.F_ijk)
        section = TripletSection(ctx, above, sorted(sub.edges), checks)
        bad = {k: w for k, w in checks.items() if w is not None}
        if bad:
            raise VerificationFailed(f"checks failed for C_i={p.codes[ci]}: {sorted(bad)}", bad)
        report.triplets.append(section)

    cert = condition_ii_feasible(p, variant, budget=budget)
    report.verdict = cert.verdict
    if cert.exists:
        raise VerificationFailed("condition (ii) admits an ordering", cert)
    report.obstruction = list(
        max(cert.maximal_reachable, key=lambda s: (len(s), sorted(p.codes[c] for c in s)))
    )
    return report, p
