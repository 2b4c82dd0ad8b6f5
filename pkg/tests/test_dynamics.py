import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eftsim.dynamics import (
    IDENTITY, PARENT, SMALLEST_EDGE_MARK, SMALLEST_MARK, FGraph, build_f_graph,
    compute_foliation, degree_increase, drainage_sim, random_functional_graph, royal_successor,
    shift_commutes,
)
from eftsim.samplers import sample_canopy, sample_egwt
from eftsim.tree_core import FamilyTree, Network


def triangle(marks=(1.0, 2.0, 3.0)):
    return Network(3, [[0, 1], [1, 2], [2, 0]], vmarks=list(marks))


def complete(d, h):
    parent = [-1]
    frontier = [0]
    for _ in range(h):
        nxt = []
        for v in frontier:
            for _ in range(d):
                parent.append(v)
                nxt.append(len(parent) - 1)
        frontier = nxt
    return FamilyTree(parent, 0)


# --- shifts and f-graphs

def test_identity_self_loops():
    fg = build_f_graph(triangle(), IDENTITY)
    assert fg.image.tolist() == [0, 1, 2]


def test_smallest_mark_triangle():
    # marks 1 < 2 < 3 on vertices 0, 1, 2
    assert build_f_graph(triangle(), SMALLEST_MARK).image.tolist() == [1, 0, 0]


def test_smallest_mark_tie_stays():
    assert SMALLEST_MARK(triangle((1.0, 2.0, 2.0)), 0) == 0


def test_smallest_edge_mark():
    net = Network(3, [[0, 1], [0, 2]], hmarks=[[0.7, 0.0], [0.2, 0.0]])
    assert SMALLEST_EDGE_MARK(net, 0) == 2


def test_parent_shift_edges():
    t = complete(2, 2)
    img = PARENT.image(t)
    kids = np.flatnonzero(t.parent >= 0)
    assert (img[kids] == t.parent[kids]).all()


def test_degree_increase():
    # star centre has the largest degree; leaves go to it, the centre stays
    net = Network(4, [[0, 1], [0, 2], [0, 3]], vmarks=[0.1, 0.2, 0.3, 0.4])
    assert degree_increase().image(net).tolist() == [0, 0, 0, 0]
    # vertex 1 sees two higher-degree neighbours with equal marks
    tie = Network(7, [[1, 0], [1, 3], [0, 2], [0, 4], [3, 5], [3, 6]],
                  vmarks=[0.5, 0.1, 0.2, 0.5, 0.3, 0.6, 0.7])
    with pytest.raises(ValueError):
        degree_increase()(tie, 1)


def test_build_f_graph_rejects_undefined():
    t = sample_egwt("0:1/2,2:1/2", 2, seed=0)
    with pytest.raises(ValueError):
        build_f_graph(t, royal_successor())


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.randoms(use_true_random=False))
def test_covariance(n, rnd):
    edges = [[i, rnd.randrange(i)] for i in range(1, n)]
    marks = rnd.sample(range(1000), n)
    net = Network(n, edges, vmarks=[float(m) for m in marks],
                  hmarks=[[rnd.random(), rnd.random()] for _ in edges])
    perm = list(range(n))
    rnd.shuffle(perm)
    for f in (IDENTITY, SMALLEST_MARK, SMALLEST_EDGE_MARK, degree_increase()):
        assert shift_commutes(net, f, perm)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), st.randoms(use_true_random=False))
def test_tree_shift_covariance(n, rnd):
    t = FamilyTree([-1] + [rnd.randrange(i) for i in range(1, n)])
    perm = list(range(n))
    rnd.shuffle(perm)
    for f in (PARENT, royal_successor(cyclic=True)):
        assert shift_commutes(t, f, perm)


# --- foliation

def test_three_cycle():
    res = compute_foliation(FGraph(np.array([1, 2, 0])))
    (c,) = res.components
    assert len(c.foils) == 3 and all(len(f) == 1 for f in c.foils)
    assert res.all_ok()


def test_path_into_fixed_point():
    res = compute_foliation(FGraph(np.array([1, 2, 2])))
    (c,) = res.components
    assert len(c.cycle) == 1 and len(c.foils) == 1
    assert sorted(c.foils[0].tolist()) == [0, 1, 2]


def test_star():
    res = compute_foliation(FGraph(np.array([0, 0, 0, 0, 0])))
    (c,) = res.components
    assert len(c.foils) == 1 and len(c.cycle) == 1


def test_foils_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(50):
        fg = random_functional_graph(int(rng.integers(1, 30)), rng)
        n = fg.n
        iters = [fg.power(k) for k in range(n + 1)]
        res = compute_foliation(fg)
        foil = res.foil_of()
        for x in range(n):
            for y in range(n):
                same = any(it[x] == it[y] for it in iters)
                assert same == (foil[x] == foil[y])


def test_random_functional_graphs():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        assert compute_foliation(random_functional_graph(int(rng.integers(1, 51)), rng)).all_ok()


def test_parent_foils_are_generations():
    # in a window the top is a fixed point, so only meets below the top are genuine
    t = sample_egwt("0:1/3,1:1/3,2:1/3", 4, seed=5)
    fg = build_f_graph(t, PARENT)
    depth = t.level - t.level[t.top]
    for x in range(t.n):
        for y in range(t.n):
            k = next(k for k in range(t.n + 1) if fg.power(k)[x] == fg.power(k)[y])
            genuine = k <= min(depth[x], depth[y])
            assert genuine == (t.level[x] == t.level[y])
            if genuine and x == t.root:
                assert y in t.generation_members(t.root, k).vertices


def test_foliation_csv():
    text = compute_foliation(FGraph(np.array([1, 0, 0]))).to_csv()
    assert text.splitlines()[0] == "component_id,size,cycle_len,n_foils,foil_sizes"
    # foil i holds the i-th cycle vertex: {0} first, then {1, 2}
    assert text.splitlines()[1] == "0,3,2,2,1;2"


# --- drainage

def test_drainage_all_left():
    net, f, pos = drainage_sim(2, 4, choices=np.full(4, -1))
    res = compute_foliation(build_f_graph(net, f))
    assert res.all_ok()


@pytest.mark.parametrize("rule", ["iid_uniform", "stationary_block"])
def test_drainage_windows(rule):
    rng = np.random.default_rng(2)
    for _ in range(200):
        net, f, pos = drainage_sim(8, 6, rule, rng)
        assert compute_foliation(build_f_graph(net, f)).all_ok()


def test_drainage_foils_horizontal_and_consecutive():
    rng = np.random.default_rng(3)
    W = 12
    for _ in range(50):
        net, f, pos = drainage_sim(W, 8, "iid_uniform", rng)
        res = compute_foliation(build_f_graph(net, f))
        for c in res.components:
            for foil in c.foils:
                ys = set(pos[foil, 1].tolist())
                assert len(ys) == 1
                xs = sorted(pos[foil, 0].tolist())
                if len(xs) < W // 2:
                    # consecutive even-spaced points of one row, cyclically
                    gaps = [(b - a) % W for a, b in zip(xs, xs[1:] + xs[:1])]
                    assert sorted(gaps)[:-1] == [2] * (len(xs) - 1)


def test_drainage_rejects_odd_sizes():
    with pytest.raises(ValueError):
        drainage_sim(3, 4)


# --- royal successor

def test_royal_path_goes_to_parent():
    t = FamilyTree([-1, 0, 1, 2])
    img = royal_successor().image(t)
    assert img.tolist() == [-1, 0, 1, 2]


def test_royal_single_orbit_on_canopy_window():
    t = complete(2, 3)
    img = royal_successor(cyclic=True).image(t)
    v, seen = 0, set()
    for _ in range(t.n):
        seen.add(v)
        v = int(img[v])
    assert len(seen) == t.n and v == 0


def test_royal_injective_on_interior():
    for seed in range(100):
        t = sample_canopy(2, 2.0, 4, seed=seed)
        img = royal_successor().image(t)
        defined = img[img >= 0]
        assert len(set(defined.tolist())) == len(defined)
