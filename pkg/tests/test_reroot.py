import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eftsim.reroot import (
    GeometricPruneSampler, TreeMeasure, enumerate_rooted_trees, prune, prune_batch, prune_geometric,
    sigma_exact, sigma_mc,
)
from eftsim.samplers import EGWTSampler, GWTSampler, OffspringDistribution, sample_egwt
from eftsim.tree_core import FamilyTree, TreeBatch
from eftsim.verify import egwt_ball_law, empirical_law, tv_distance

O = OffspringDistribution.parse
CRIT = O("0:1/2,2:1/2")
SMALL = enumerate_rooted_trees(4)


@st.composite
def measures(draw, codes=SMALL, max_support=4):
    support = draw(st.lists(st.sampled_from(codes), min_size=1, max_size=max_support, unique=True))
    w = [draw(st.integers(1, 9)) for _ in support]
    total = sum(w)
    return TreeMeasure({c: Fraction(x, total) for c, x in zip(support, w)})


def d(n):
    return lambda t: len(t.descendants_n(t.root, n).vertices)


def test_enumeration_counts():
    # rooted Family Trees with at most k vertices
    assert [len(enumerate_rooted_trees(k)) for k in range(1, 6)] == [1, 3, 8, 21, 56]


def test_measure_validation():
    with pytest.raises(ValueError):
        TreeMeasure({b"()": Fraction(1, 2)})
    mu = TreeMeasure({b"()": Fraction(1)})
    assert TreeMeasure.from_lines(mu.to_lines()) == mu


def test_sigma_zero_is_identity():
    mu = TreeMeasure({b"()": Fraction(1)})
    assert sigma_exact(mu, 0) == mu


def test_sigma_cherry():
    cherry = FamilyTree([-1, 0, 0])
    out = sigma_exact(TreeMeasure.point_mass(cherry), 1)
    assert out == TreeMeasure({cherry.canonicalize(at=1): Fraction(1)})


def test_sigma_undefined():
    with pytest.raises(ValueError):
        sigma_exact(TreeMeasure({b"()": Fraction(1)}), 1)


def test_sigma_budget():
    big = FamilyTree([-1] + list(range(9)))
    with pytest.raises(ValueError):
        sigma_exact(TreeMeasure.point_mass(big), 1, budget=8)


@settings(max_examples=80, deadline=None)
@given(measures(), st.integers(1, 2), st.integers(1, 2))
def test_semigroup(mu, m, n):
    try:
        rhs = sigma_exact(mu, m + n)
    except ValueError:
        rhs = None
    try:
        lhs = sigma_exact(sigma_exact(mu, n), m)
    except ValueError:
        lhs = None
    assert lhs == rhs


@settings(max_examples=80, deadline=None)
@given(measures(), st.integers(1, 2), st.integers(0, 2))
def test_expectation_of_d_m(mu, n, m):
    en = mu.expectation(d(n))
    if en == 0:
        return
    assert sigma_exact(mu, n).expectation(d(m)) == mu.expectation(d(m + n)) / en


@settings(max_examples=50, deadline=None)
@given(measures(), st.integers(0, 3))
def test_mass_conservation(mu, n):
    try:
        out = sigma_exact(mu, n)
    except ValueError:
        return
    assert sum(out.weights.values()) == 1


# --- Monte Carlo re-rooting

class MeasureSampler:
    """Draws finite trees from a TreeMeasure."""

    def __init__(self, mu):
        self.codes = list(mu.weights)
        self.p = np.array([float(mu.weights[c]) for c in self.codes])
        self.trees = [mu.tree(c) for c in self.codes]

    def __call__(self, n, rng):
        pick = rng.choice(len(self.codes), size=n, p=self.p)
        return TreeBatch.from_trees([self.trees[i] for i in pick])


def batch_law(batch):
    return empirical_law(batch[i].canonicalize() for i in range(len(batch)))


def test_sigma_mc_matches_exact():
    codes = enumerate_rooted_trees(5)
    mu = TreeMeasure({c: Fraction(1, len(codes)) for c in codes})
    for n in (1, 2):
        exact = {k: float(v) for k, v in sigma_exact(mu, n).weights.items()}
        out = sigma_mc(MeasureSampler(mu), n, 20_000, seed=n, chunk=5000)
        assert tv_distance(batch_law(out), exact) < 0.03


def test_sigma_mc_zero_is_identity():
    mu = TreeMeasure({c: Fraction(1, len(SMALL)) for c in SMALL})
    out = sigma_mc(MeasureSampler(mu), 0, 20_000, seed=3, chunk=5000)
    assert tv_distance(batch_law(out), {k: float(v) for k, v in mu.weights.items()}) < 0.03


def test_sigma_mc_parent_size_biased():
    out = sigma_mc(GWTSampler(CRIT, 4), 1, 5000, seed=5)
    assert (out.d1[out.parent[out.roots]] == 2).all()


def test_sigma_mc_independent_of_workers_and_chunks():
    a = sigma_mc(GWTSampler(CRIT, 5), 2, 3000, seed=9, chunk=4000)
    b = sigma_mc(GWTSampler(CRIT, 5), 2, 3000, seed=9, chunk=4000, workers=2)
    assert a.codes(3) == b.codes(3)


def test_sigma_mc_warns_on_small_ess():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        sigma_mc(GWTSampler(CRIT, 8), 6, 2000, seed=1, oversample=2)
    assert any("effective sample size" in str(x.message) for x in w)


def test_sigma_one_fixes_egwt_ball_law():
    # sigma_1 of the critical eternal tree has the same radius-2 law
    out = sigma_mc(EGWTSampler(CRIT, 4, 4), 1, 50_000, seed=12)
    exact = {k: float(v) for k, v in egwt_ball_law(CRIT, 2).items()}
    assert tv_distance(empirical_law(out.codes(2, labelled=False)), exact) < 0.02


# --- pruning

def test_prune_path():
    t = sample_egwt("1:1", spine_height=5, seed=0)
    p = prune(t, 2)
    assert sorted(p.level.tolist()) == list(range(-5, 3))
    assert not p.boundary[p.level == 2].any()


def test_prune_zero_keeps_ancestry_and_drops_descendants():
    t = sample_egwt("2:1", spine_height=3, seed=0)
    p = prune(t, 0)
    assert p.d1[p.root] == 0
    assert (p.level <= 0).all()
    assert p.n == int((t.level <= 0).sum())


def test_prune_twice():
    t = sample_egwt(CRIT, spine_height=4, seed=3)
    for z in range(4):
        for z2 in range(z + 1):
            assert prune(prune(t, z), z2).canonicalize(3, ordered=True) == \
                prune(t, z2).canonicalize(3, ordered=True)


def test_prune_batch_matches_prune():
    b = EGWTSampler(CRIT, 3, 3)(30, np.random.default_rng(1))
    z = np.arange(30) % 3
    pb = prune_batch(b, z)
    for i in range(30):
        assert pb[i].canonicalize(2) == prune(b[i], int(z[i])).canonicalize(2)


def test_geometric_prune_needs_m_above_one():
    with pytest.raises(ValueError):
        GeometricPruneSampler(EGWTSampler(CRIT, 3), 1.0)


def test_prune_geometric_estimates_m():
    s = prune_geometric(EGWTSampler(O("2:1"), 3, 3), seed=0, pilot=2000)
    assert s.m == pytest.approx(2.0)
