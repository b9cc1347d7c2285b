"""Build the forest poset on 3, 4 and 5 labels and look at its shape."""
from __future__ import annotations

from tuffley import augment, build_tuffley, check_graded, check_thin
from tuffley.forest import decode

for n in (3, 4, 5):
    s = build_tuffley(n)
    profile = [s.ranks.count(r) for r in range(max(s.ranks) + 1)]
    p = augment(s)
    print(f"n={n}: {len(s)} forests, ranks {profile}, graded={check_graded(p) is None}, thin={check_thin(p) is None}")

s = build_tuffley(3)
(top,) = s.maximal()
print("\nthe unique trivalent tree on three labels:", s.codes[top])
for x in s.covers[top]:
    f = decode(s.codes[x], 3)
    print("  covers", s.codes[x], "with vertex label sets", [sorted(v) for v in f.blocks[0].vertices])
