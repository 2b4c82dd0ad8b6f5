"""Foils of a few vertex-shifts.

Builds the f-graph of random functional graphs and of the drainage
network, then prints the component table and checks the one-cycle rule.

    python demos/foliation_of_shifts.py
"""

import numpy as np

from eftsim.dynamics import build_f_graph, compute_foliation, drainage_sim, random_functional_graph

rng = np.random.default_rng(0)

fg = random_functional_graph(12, rng)
res = compute_foliation(fg)
print("map:", fg.image.tolist())
print(res.to_csv())

bad = 0
for _ in range(1000):
    bad += not compute_foliation(random_functional_graph(int(rng.integers(1, 51)), rng)).all_ok()
print("random graphs violating the one-cycle rule:", bad)

net, f, pos = drainage_sim(8, 6, "iid_uniform", rng)
res = compute_foliation(build_f_graph(net, f))
for c in res.components[:3]:
    rows = sorted({int(pos[foil[0], 1]) for foil in c.foils})
    print(f"drainage component of size {len(c.vertices)}: {len(c.foils)} foils on rows {rows}")
