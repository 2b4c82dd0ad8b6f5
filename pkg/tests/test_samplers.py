from fractions import Fraction

import numpy as np
import pytest
from _stats import gof_pvalue, mean_se, within

from eftsim.samplers import (
    CanopySampler, EGWTSampler, EMGWTSampler, GWTSampler, JoinedSampler, MultiTypeOffspring,
    OffspringDistribution, canopy_params, comb_params, isolated_end_params, join_stationary,
    parse_param_file, sample_canopy, sample_egwt, sample_emgwt, sample_gwt, size_biased,
)
from eftsim.tree_core import FamilyTree
from eftsim.verify import PARENT_DEGREE, mtp_test

O = OffspringDistribution.parse
CRIT = O("0:1/2,2:1/2")


def rng(seed=0):
    return np.random.default_rng(seed)


# --- offspring laws

def test_parse_forms_agree():
    a = O("0:1/2,2:1/2")
    b = O([[0, 1, 2], [2, 1, 2]])
    c = OffspringDistribution({0: Fraction(1, 2), 2: "1/2"})
    assert a == b == c
    assert a.exact and a.mean == 1 and a.c == 1


def test_double_mode():
    pi = OffspringDistribution({0: 0.25, 1: 0.75})
    assert not pi.exact
    assert pi.mean == pytest.approx(0.75)


@pytest.mark.parametrize("bad", ["0:1/2", "0:-1/2,1:3/2", "-1:1"])
def test_rejects_bad_laws(bad):
    with pytest.raises(ValueError):
        O(bad)


@pytest.mark.parametrize("pi,hat", [
    ("0:1/2,2:1/2", {2: 1}),
    ("1:1", {1: 1}),
    ("1:1/2,3:1/2", {1: Fraction(1, 4), 3: Fraction(3, 4)}),
])
def test_size_biased_examples(pi, hat):
    assert size_biased(O(pi)).as_dict() == hat


def test_size_biased_rejects_zero_mean():
    with pytest.raises(ValueError):
        size_biased(O("0:1"))


def test_offspring_sampling_law():
    pi = O("0:1/4,1:1/4,3:1/2")
    assert gof_pvalue(pi.sample(rng(), 50_000), pi.as_dict()) > 1e-3


# --- Galton-Watson trees

def test_gwt_extinct_law():
    assert sample_gwt("0:1", seed=3).n == 1


def test_gwt_complete_binary():
    t = sample_gwt("2:1", depth_cap=3, seed=0)
    assert t.n == 15
    leaves = np.flatnonzero(t.d1 == 0)
    assert t.boundary[leaves].all() and t.boundary.sum() == 8


def test_gwt_single_vertex_probability():
    b = GWTSampler(CRIT, 1)(100_000, rng(1))
    single = (b.sizes == 1).astype(float)
    m, se = mean_se(single)
    assert within(m, 0.5, se)


def test_gwt_pop_cap_marks_boundary():
    b = GWTSampler(O("3:1"), 10, pop_cap=50)(5, rng())
    assert (b.sizes <= 50).all()
    assert b.boundary.any()


# --- eternal trees

def test_egwt_path():
    for seed in range(5):
        t = sample_egwt("1:1", spine_height=6, seed=seed)
        # six generations up and six down
        assert t.n == 13 and (t.d1 <= 1).all()
        assert sorted(t.level.tolist()) == list(range(-6, 7))


def test_egwt_regular():
    t = sample_egwt("2:1", spine_height=3, seed=0)
    interior = (~t.boundary) & (t.dist < 3)
    deg = t.d1 + (t.parent >= 0)
    assert (deg[interior] == 3).all()


def test_egwt_root_and_spine_laws():
    N = 100_000
    b = EGWTSampler(CRIT, 3, 3)(N, rng(2))
    o = b.roots
    p = b.parent[o]
    assert gof_pvalue(b.d1[o], CRIT.as_dict()) > 1e-3
    assert (b.d1[p] == 2).all()


def test_egwt_spine_size_biased_general():
    pi = O("1:1/2,3:1/2")
    b = EGWTSampler(pi, 3, 3)(100_000, rng(3))
    anc, _ = b.ancestors(2)
    hat = pi.size_biased().as_dict()
    assert gof_pvalue(b.d1[b.parent[b.roots]], hat) > 1e-3
    assert gof_pvalue(b.d1[anc], hat) > 1e-3


def test_egwt_root_and_sibling_uncorrelated():
    pi = O("0:1/3,1:1/3,2:1/3")
    b = EGWTSampler(pi, 2, 2)(100_000, rng(4))
    o = b.roots
    p = b.parent[o]
    # first sibling of o (if any)
    sib = np.full(len(b), -1)
    for i in np.flatnonzero(b.d1[p] > 1)[:20_000]:
        kids = b.children(p[i])
        sib[i] = kids[kids != o[i]][0]
    has = sib >= 0
    x, y = b.d1[o][has].astype(float), b.d1[sib[has]].astype(float)
    prod = (x - x.mean()) * (y - y.mean())
    m, se = mean_se(prod)
    assert within(m, 0.0, se)


def test_egwt_valid_radius_is_min_of_caps():
    b = EGWTSampler(CRIT, 5, 2)(20, rng())
    assert (b.valid_radius >= 2).all()
    with pytest.raises(ValueError):
        EGWTSampler(CRIT, 0)(1, rng())


def test_egwt_descendant_depth():
    b = EGWTSampler(CRIT, 1, descendant_depth=4)(200, rng(5))
    counts, complete = b.descendant_counts(4)
    assert complete.all()


def test_sampling_is_deterministic():
    a = sample_egwt("0:1/2,2:1/2", 6, seed=11).to_text()
    b = sample_egwt("0:1/2,2:1/2", 6, seed=11).to_text()
    assert a == b


# --- multi-type

def two_type_params():
    laws = {1: {(1, 1): 0.5, (2, 0): 0.5}, 2: {(1, 0): 0.7, (0, 2): 0.3}}
    M = np.array([[1.5, 0.5], [0.7, 0.6]])
    w, v = np.linalg.eig(M.T)
    k = int(np.argmax(w.real))
    b = np.abs(v[:, k].real)
    return MultiTypeOffspring([1, 2], laws, b / b.sum(), float(w[k].real))


def test_multitype_eigen_check():
    p = two_type_params()
    with pytest.raises(ValueError):
        MultiTypeOffspring(p.types, p.laws, [0.5, 0.5], p.rho)


def test_emgwt_root_types_and_transitions():
    p = two_type_params()
    N = 100_000
    b = EMGWTSampler(p, 2, 2)(N, rng(6))
    t0 = b.vtype[b.roots]
    t1 = b.vtype[b.parent[b.roots]]
    assert gof_pvalue(t0, dict(zip(p.types, p.b))) > 1e-3
    P = p.transition()
    for a, i in enumerate(p.types):
        sel = t0 == i
        assert gof_pvalue(t1[sel], dict(zip(p.types, P[a]))) > 1e-3


def test_emgwt_spine_offspring_biased():
    p = two_type_params()
    b = EMGWTSampler(p, 2, 2)(100_000, rng(7))
    o = b.roots
    par = b.parent[o]
    sel = (b.vtype[o] == 2) & (b.vtype[par] == 1)
    # type-1 parent of a type-2 spine child: offspring (1,1) with probability 1
    assert p.biased(1, 2) == {(1, 1): 1.0}
    assert (b.d1[par[sel]] == 2).all()


def test_emgwt_canopy_root_layer():
    b = EMGWTSampler(canopy_params(2, 2.0), 3, 3)(100_000, rng(8))
    layer = b.vtype[b.roots]
    pmf = {i: 0.5 ** (i + 1) for i in range(6)}
    x = np.minimum(layer, 5)
    pmf[5] = 1 - sum(pmf[i] for i in range(5))
    assert gof_pvalue(x, pmf) > 1e-3


def test_emgwt_isolated_end_d1():
    t = sample_emgwt(isolated_end_params(1), 5, seed=0)
    assert (t.vtype == 2).all()
    assert (t.d1[t.parent >= 0] <= 1).all()


def test_emgwt_comb():
    p = comb_params(0.5)
    b = EMGWTSampler(p, 3, 3)(500, rng(9))
    for i in range(len(b)):
        t = b[i]
        for v in np.flatnonzero((t.dist < 2) & ~t.boundary):
            kids = t.children(v)
            if len(kids) and not t.boundary[kids].any():
                assert sorted(t.d1[kids].tolist()) == list(range(1, len(kids) + 1))


# --- canopy

def test_canopy_layer_law():
    b = CanopySampler(2, 2.0, 3)(100_000, rng(10))
    layer = b.vtype[b.roots]
    m0, se0 = mean_se(layer == 0)
    m1, se1 = mean_se(layer == 1)
    assert within(m0, 0.5, se0) and within(m1, 0.25, se1)


def test_canopy_depth_zero():
    assert sample_canopy(3, 2.0, 0, seed=1).n == 1


def test_biased_canopy_mean():
    b = CanopySampler(2, 4.0, 2)(100_000, rng(11))
    m, se = mean_se(b.d1[b.roots])
    assert within(m, 0.5, se)


# --- joining

def test_join_single_vertices_is_path():
    t = join_stationary(lambda r: FamilyTree([-1]), 4, seed=0)
    assert t.n == 9
    assert (t.d1 <= 1).all() and (t.d1 == 0).sum() == 1


def test_join_spine_and_component_size():
    pi = O("0:3/4,2:1/4")
    s = JoinedSampler(GWTSampler(pi, 40), 2)
    b = s(20_000, rng(12))
    t = b[0]
    # the tops form the unique spine
    tops = [t.root]
    while t.parent[tops[-1]] >= 0:
        tops.append(int(t.parent[tops[-1]]))
    assert len(tops) == 3
    comp = GWTSampler(pi, 40)(50_000, rng(13)).sizes
    m, se = mean_se(comp)
    assert within(m, 2.0, se)


def test_join_stationary_unimodular():
    pi = O("0:3/4,2:1/4")
    s = JoinedSampler(GWTSampler(pi, 40), 3, stationary=True)
    r = mtp_test(s, PARENT_DEGREE, 50_000, seed=14)
    assert r.verdict, r.summary()


# --- parameter files

def test_param_file(tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("pi = [[0, 1, 2], [2, 1, 2]]  # critical\nspine_height = 6\nseed = 3\n")
    p = parse_param_file(str(f))
    assert p["pi"] == CRIT and p["spine_height"] == 6 and p["seed"] == 3
