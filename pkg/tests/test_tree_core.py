import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eftsim.samplers import EGWTSampler, GWTSampler, OffspringDistribution, sample_canopy, sample_gwt
from eftsim.tree_core import (
    INF_RADIUS, FamilyTree, Network, TreeBatch, TruncationError, canonicalize, descendants_n,
    generation_members, generation_offset, parse_code,
)

CRIT = OffspringDistribution.parse("0:1/2,2:1/2")


@st.composite
def random_trees(draw, max_n=25):
    n = draw(st.integers(1, max_n))
    parent = [-1] + [draw(st.integers(0, i - 1)) for i in range(1, n)]
    root = draw(st.integers(0, n - 1))
    return FamilyTree(parent, root)


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


# --- construction and invariants

def test_rejects_two_parentless_vertices():
    with pytest.raises(ValueError):
        FamilyTree([-1, -1, 0])


def test_rejects_cycles():
    # 1 -> 2 -> 1 leaves only vertex 0 parentless but is not a tree
    with pytest.raises(ValueError):
        FamilyTree([-1, 2, 1])


@given(random_trees())
def test_parent_child_consistency(t):
    for v in range(t.n):
        for c in t.children(v):
            assert t.parent[c] == v
    assert int((t.parent >= 0).sum()) == t.n - 1
    assert t.level[t.root] == 0


def test_immutable():
    t = complete(2, 2)
    with pytest.raises(ValueError):
        t.parent[1] = 5


# --- generation offsets

def test_generation_offset_examples():
    # path a -> b -> c with c the top
    t = FamilyTree([1, 2, -1], 2)
    a, b, c = 0, 1, 2
    assert generation_offset(t, a, a) == 0
    assert generation_offset(t, a, b) == 1
    assert generation_offset(t, a, c) == 2
    assert generation_offset(t, c, a) == -2


@given(random_trees(), st.data())
def test_generation_offset_cocycle(t, data):
    for _ in range(20):
        v, w, z = (data.draw(st.integers(0, t.n - 1)) for _ in range(3))
        assert t.generation_offset(v, w) + t.generation_offset(w, z) == t.generation_offset(v, z)
        assert t.generation_offset(v, w) == -t.generation_offset(w, v)


# --- descendants and generations

def test_descendants_examples():
    t = complete(2, 2)
    assert descendants_n(t, 0, 0).vertices.tolist() == [0]
    assert len(descendants_n(t, 0, 2).vertices) == 4


def test_gwt_d2_values():
    rng = np.random.default_rng(0)
    b = GWTSampler(CRIT, 3)(2000, rng)
    counts, complete_ = b.descendant_counts(2)
    assert complete_.all()
    assert set(np.unique(counts)) <= {0, 2, 4}


@given(random_trees(), st.integers(0, 3), st.integers(0, 3), st.data())
def test_descendant_union(t, m, n, data):
    v = data.draw(st.integers(0, t.n - 1))
    parts = [set(t.descendants_n(w, m).vertices.tolist()) for w in t.descendants_n(v, n).vertices]
    union = set().union(*parts) if parts else set()
    assert sum(len(p) for p in parts) == len(union)
    assert union == set(t.descendants_n(v, m + n).vertices.tolist())


def test_generation_members_canopy():
    t = sample_canopy(2, 1e9, 4, seed=1)  # d_tilde huge: root in layer 0 almost surely
    assert t.d1[t.root] == 0
    assert len(generation_members(t, t.root, 1).vertices) == 2
    assert len(generation_members(t, t.root, 0).vertices) == 1


def test_generation_members_path():
    t = EGWTSampler(OffspringDistribution.parse("1:1"), 6)(1, np.random.default_rng(0))[0]
    for n in range(4):
        assert len(t.generation_members(t.root, n).vertices) == 1


def test_generation_members_cut_ancestry():
    t = EGWTSampler(CRIT, 2)(1, np.random.default_rng(0))[0]
    g = t.generation_members(t.root, 5)
    assert not g.complete


# --- truncation

def test_valid_radius():
    t = sample_gwt("2:1", depth_cap=3, seed=0)
    assert t.n == 15
    assert t.valid_radius == 3
    assert complete(2, 2).valid_radius == INF_RADIUS


def test_code_refuses_truncated_ball():
    t = sample_gwt("2:1", depth_cap=2, seed=0)
    t.canonicalize(2)
    with pytest.raises(TruncationError):
        t.canonicalize(3)


# --- canonical codes

def test_single_vertex_code():
    assert FamilyTree([-1]).canonicalize() == b"()"


def test_unordered_children_sorted():
    # root with (leaf, cherry) and with (cherry, leaf)
    a = FamilyTree([-1, 0, 0, 2, 2])
    b = FamilyTree([-1, 0, 1, 1, 0])
    assert a.canonicalize() == b.canonicalize()
    assert a.canonicalize(ordered=True) != b.canonicalize(ordered=True)


@settings(max_examples=60)
@given(random_trees(), st.randoms(use_true_random=False))
def test_code_invariant_under_relabelling(t, rnd):
    perm = list(range(t.n))
    rnd.shuffle(perm)
    u = t.relabel(perm)
    assert u.canonicalize() == t.canonicalize()
    assert u.canonicalize(ordered=True) == t.canonicalize(ordered=True)
    assert canonicalize(u, 2) == canonicalize(t, 2)


@given(random_trees())
def test_parse_code_roundtrip(t):
    for ordered in (False, True):
        code = t.canonicalize(ordered=ordered)
        assert parse_code(code).canonicalize(ordered=ordered) == code


def test_codes_distinguish_root_position():
    path = FamilyTree([-1, 0, 1])
    assert path.canonicalize(at=0) != path.canonicalize(at=2)
    assert path.canonicalize(at=0) != path.canonicalize(at=1)


def test_labels_enter_codes():
    a = FamilyTree([-1, 0], vtype=[0, 1])
    b = FamilyTree([-1, 0], vtype=[0, 2])
    assert a.canonicalize() != b.canonicalize()
    assert a.canonicalize(labelled=False) == b.canonicalize(labelled=False)


# --- serialization

@given(random_trees())
def test_text_roundtrip(t):
    u = FamilyTree.from_text(t.to_text())
    assert u.canonicalize(ordered=True) == t.canonicalize(ordered=True)
    assert u.root == t.root


def test_text_roundtrip_with_boundary_and_types():
    t = sample_canopy(2, 2.0, 3, seed=4)
    u = FamilyTree.from_text(t.to_text())
    assert np.array_equal(u.boundary, t.boundary)
    assert np.array_equal(u.vtype, t.vtype)
    assert u.valid_radius == t.valid_radius


# --- batches

def test_batch_matches_trees():
    b = EGWTSampler(CRIT, 3, 3)(50, np.random.default_rng(2))
    trees = [b[i] for i in range(len(b))]
    codes = b.codes(2)
    assert codes == [t.canonicalize(2) for t in trees]
    counts, _ = b.descendant_counts(2)
    assert counts.tolist() == [len(t.descendants_n(t.root, 2).vertices) for t in trees]
    again = TreeBatch.from_trees(trees)
    assert again.codes(2) == codes


def test_batch_reroot_and_take():
    b = GWTSampler(CRIT, 4)(20, np.random.default_rng(1))
    sub = b.take([3, 1, 3])
    assert len(sub) == 3
    assert sub[0].canonicalize(4) == sub[2].canonicalize(4) == b[3].canonicalize(4)


def test_batch_ancestors():
    b = EGWTSampler(CRIT, 3)(10, np.random.default_rng(5))
    anc, cut = b.ancestors(2)
    for i in range(len(b)):
        t = b[i]
        assert anc[i] - b.tree_ptr[i] == t.ancestor(t.root, 2)


# --- networks

def test_network_connectivity_flag():
    with pytest.raises(ValueError):
        Network(3, [[0, 1]])
    net = Network(3, [[0, 1]], allow_disconnected=True)
    assert not net.connected


def test_network_degrees_and_relabel():
    net = Network(3, [[0, 1], [1, 2]], vmarks=[1.0, 2.0, 3.0])
    assert [net.degree(v) for v in range(3)] == [1, 2, 1]
    r = net.relabel([2, 0, 1])
    assert r.degree(0) == 2
    assert r.vmarks[0] == 2.0


def test_tree_to_network():
    net = complete(2, 2).to_network()
    assert net.n == 7 and len(net.edges) == 6
