"""A walk around the critical eternal binary tree.

Draws one window, prints its shape, then checks by simulation that the
root has on average one descendant in every generation and that the
parent-degree transport balances.

    python demos/eternal_tree_tour.py
"""

from eftsim import EGWTSampler, GWTSampler, OffspringDistribution, sample_egwt
from eftsim.verify import PARENT_DEGREE, moment_check, mtp_test

pi = OffspringDistribution.parse("0:1/2,2:1/2")

t = sample_egwt(pi, spine_height=4, seed=1)
print(f"window: {t.n} vertices, exact to radius {t.valid_radius}")
print("root has", int(t.d1[t.root]), "children; its parent has", int(t.d1[t.parent[t.root]]))

# the spine is size-biased, so every ancestor of the root has two children
anc = t.root
while t.parent[anc] >= 0 and not t.boundary[t.parent[anc]]:
    anc = int(t.parent[anc])
    assert t.d1[anc] == 2

for r in moment_check(EGWTSampler(pi, 1, descendant_depth=4), pi, 4, 100_000, seed=2, unimodular=True):
    print(r.summary())

print(mtp_test(EGWTSampler(pi, 4, 4), PARENT_DEGREE, 100_000, seed=3).summary())

# an ordinary GW tree seen from its root fails the same transport:
# the root never has a parent, so nothing is ever sent to a parent of degree 2
print(mtp_test(GWTSampler(pi, 4), PARENT_DEGREE, 100_000, seed=4).summary())
