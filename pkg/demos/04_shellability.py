"""Search for a recursive coatom ordering; find one for n = 3, 4 and an obstruction for n = 5."""
from __future__ import annotations

from tuffley import augment, build_tuffley, condition_ii_feasible, rco_search, replay_certificate, obstruction_report

for n in (3, 4):
    p = augment(build_tuffley(n))
    cert = rco_search(p)
    print(f"n={n}: {cert.verdict}; replay problem: {replay_certificate(cert, p)}")
    print("  top-level order:", [p.codes[c] for c in cert.coatom_order()])

p = augment(build_tuffley(5))
for variant in ("nonstrict", "strict"):
    cert = condition_ii_feasible(p, variant)
    sizes = sorted({len(s) for s in cert.maximal_reachable})
    print(f"n=5 {variant}: {cert.verdict}; maximal reachable subsets have sizes {sizes}")

report, p = obstruction_report(5, p)
print()
print("\n".join(report.lines(p)))
