"""Edge weights on a quartet tree, their path products, and what happens at 0 and 1."""
from __future__ import annotations

import numpy as np

from tuffley import EdgeWeightVector, degenerate, lambda_T
from tuffley.edge_product import edge_name
from tuffley.forest import quartet

q = quartet(1, 2, 3, 4)
tree = q.blocks[0]
names = [edge_name(tree, e) for e in tree.edges]
weights = np.array([{"1.2|3.4": 0.5}.get(name, 0.9) for name in names])
print("edges:", {name: float(w) for name, w in zip(names, weights)})
print("products:", lambda_T(q, weights).as_dict())

weights[names.index("1.2|3.4")] = 1.0
deg = degenerate(EdgeWeightVector(q, weights))
print("\ninternal weight 1 contracts to", deg.forest.code, "agreement:", deg.agrees)

weights[names.index("1|2.3.4")] = 0.0
deg = degenerate(EdgeWeightVector(q, weights))
print("then leaf 1 at weight 0 detaches from a degree-4 centre:", deg.forest.code, "agreement:", deg.agrees)

weights[names.index("1.2|3.4")] = 0.5
deg = degenerate(EdgeWeightVector(q, weights))
print("with the internal edge kept, the same cut leaves a degree-2 vertex:", deg.unsafe)
