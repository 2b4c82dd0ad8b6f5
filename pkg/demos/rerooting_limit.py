"""Re-rooting a Galton-Watson tree until it looks eternal.

sigma_n biases the tree by the size of the n-th generation below the root
and then moves the root to a uniform member of it.  For large n the ball
around the new root follows the eternal tree's law, which we know exactly.

    python demos/rerooting_limit.py
"""

from fractions import Fraction

from eftsim import GWTSampler, OffspringDistribution
from eftsim.reroot import TreeMeasure, enumerate_rooted_trees, sigma_exact, sigma_mc
from eftsim.verify import egwt_ball_law, empirical_law, tv_distance

pi = OffspringDistribution.parse("0:1/2,2:1/2")
exact = {k: float(v) for k, v in egwt_ball_law(pi, 2).items()}

# at n = 1 the new root's grandparent is missing, so every radius-2 ball differs
for n in (1, 2, 4, 8):
    out = sigma_mc(GWTSampler(pi, n + 3), n, 50_000, seed=n)
    tv = tv_distance(empirical_law(out.codes(2, labelled=False)), exact)
    print(f"n = {n}: TV to the eternal radius-2 law = {tv:.4f}")

# exactly, on the uniform law of small trees, sigma is a semigroup
codes = enumerate_rooted_trees(4)
mu = TreeMeasure({c: Fraction(1, len(codes)) for c in codes})
print("sigma_1 sigma_1 == sigma_2:", sigma_exact(sigma_exact(mu, 1), 1) == sigma_exact(mu, 2))
