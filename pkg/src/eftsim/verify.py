"""Exact and Monte Carlo checks of mass transport type identities.

Monte Carlo checks report ``z = (lhs - rhs) / stderr`` and pass iff
``|z| <= threshold`` (3 by default).  Exact checks use rational arithmetic
and pass iff both sides are equal, reported as ``stderr = 0`` and ``z`` equal
to 0 or infinity.  Every Monte Carlo check first asks the windows for the
radius it reads and raises :class:`~eftsim.tree_core.TruncationError` when a
window is too small.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .parallel import DEFAULT_CHUNK, Moments, map_chunks, merge_all
from .tree_core import FamilyTree, Network, TreeBatch, TruncationError, expand


@dataclass(frozen=True)
class EstimatorReport:
    test_name: str
    lhs: float
    rhs: float
    stderr: float
    z: float
    n: int
    threshold: float = 3.0
    note: str = ""

    @property
    def verdict(self) -> bool:
        return bool(abs(self.z) <= self.threshold)

    @classmethod
    def from_diff(cls, name, lhs, rhs, stderr, n, threshold=3.0, note="") -> "EstimatorReport":
        diff = lhs - rhs
        if stderr == 0 or not np.isfinite(stderr):
            z = 0.0 if diff == 0 else math.inf
        else:
            z = float(diff / stderr)
        return cls(name, float(lhs), float(rhs), float(stderr), z, int(n), threshold, note)

    @classmethod
    def exact(cls, name, lhs, rhs, n, note="") -> "EstimatorReport":
        return cls(name, float(lhs), float(rhs), 0.0, 0.0 if lhs == rhs else math.inf, int(n), 3.0, note)

    CSV_FIELDS = ("test_name", "lhs", "rhs", "stderr", "z", "N", "verdict")

    def csv_row(self) -> list:
        return [self.test_name, repr(self.lhs), repr(self.rhs), repr(self.stderr), repr(self.z),
                self.n, "pass" if self.verdict else "fail"]

    def summary(self) -> str:
        tag = "PASS" if self.verdict else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return (f"{tag} {self.test_name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} "
                f"se={self.stderr:.3g} z={self.z:.3g} N={self.n}{extra}")


def write_reports(reports: Iterable[EstimatorReport], out=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EstimatorReport.CSV_FIELDS)
    for r in reports:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------- test functions

def _deg(G, v):
    return int(G.ptr[v + 1] - G.ptr[v])


def _par(G, v):
    return int(G.parent[v]) if v >= 0 else -1


@dataclass(frozen=True)
class TestFunction:
    """A covariant pair function ``g(G, u, v) >= 0``.

    ``reach`` bounds the distance between ``u`` and ``v`` on the support of
    ``g``; ``radius`` is the ball around the pair that ``g`` reads.  The
    optional ``batch(G, m)`` evaluates, at every root of a
    :class:`TreeBatch`, ``g+(o)`` and ``sum_v m^{l(v,o)} g(v, o)``.
    """

    __test__ = False

    name: str
    fn: Callable
    reach: int
    radius: int = 0
    batch: Callable | None = None
    same_generation: bool = False

    @property
    def read_radius(self) -> int:
        return self.reach + self.radius

    def __call__(self, G, u, v):
        return self.fn(G, u, v)


def _grand(G, o):
    p = G.parent[o]
    return np.where(p >= 0, G.parent[np.maximum(p, 0)], -1)


def _d2(G, o):
    verts, owner = expand(G.ptr, G.idx, np.asarray(o))
    return np.bincount(owner, weights=G.d1[verts], minlength=len(o))


def _b_parent_degree(G, m=1.0):
    o = G.roots
    return (G.parent[o] >= 0) * G.d1[o].astype(float), _d2(G, o) / m


def _b_grandparent(G, m=1.0):
    o = G.roots
    return (_grand(G, o) >= 0).astype(float), _d2(G, o) / m ** 2


def _b_parent_if_siblings(G, m=1.0):
    o = G.roots
    p = G.parent[o]
    plus = np.where(p >= 0, G.d1[np.maximum(p, 0)] >= 2, False).astype(float)
    d = G.d1[o]
    return plus, d * (d >= 2) / m


def _b_parent(G, m=1.0):
    o = G.roots
    return (G.parent[o] >= 0).astype(float), G.d1[o] / m


def _b_sibling_degree(G, m=1.0):
    o = G.roots
    p = G.parent[o]
    has = p >= 0
    plus = G.d1[o].astype(float)
    q = p[has]
    plus[has] = np.bincount(np.arange(len(q)).repeat(G.d1[q]), weights=G.d1[expand(G.ptr, G.idx, q)[0]],
                            minlength=len(q))
    minus = np.where(has, G.d1[np.maximum(p, 0)], 1) * G.d1[o]
    return plus, minus.astype(float)


PARENT_DEGREE = TestFunction(
    "parent_degree", lambda G, u, v: float(v == _par(G, u)) * _deg(G, u), 1, 1, _b_parent_degree)
GRANDPARENT = TestFunction(
    "grandparent", lambda G, u, v: float(v >= 0 and v == _par(G, _par(G, u))), 2, 0, _b_grandparent)
PARENT_IF_SIBLINGS = TestFunction(
    "parent_if_siblings", lambda G, u, v: float(v == _par(G, u) and _deg(G, v) >= 2), 1, 1,
    _b_parent_if_siblings)
PARENT_INDICATOR = TestFunction("parent", lambda G, u, v: float(v == _par(G, u)), 1, 0, _b_parent)
SIBLING_DEGREE = TestFunction(
    "sibling_degree",
    lambda G, u, v: float(u == v or (_par(G, u) >= 0 and _par(G, u) == _par(G, v))) * _deg(G, v),
    2, 1, _b_sibling_degree, same_generation=True)

TREE_FUNCTIONS = (PARENT_DEGREE, GRANDPARENT, PARENT_IF_SIBLINGS, PARENT_INDICATOR, SIBLING_DEGREE)


def _edge_count(G, u, v):
    return sum(1 for w, _, _ in G.adj[u] if w == v)


ADJACENT = TestFunction("adjacent", _edge_count, 1)
DEGREE_EDGE = TestFunction("degree_edge", lambda G, u, v: G.degree(u) * _edge_count(G, u, v), 1, 1)


def shift_pair(f) -> TestFunction:
    """``g(u, v) = 1{v = f(u)}`` for a vertex-shift ``f``."""
    return TestFunction(f"shift[{f.name}]", lambda G, u, v: float(f(G, u) == v), 10**9)


NETWORK_FUNCTIONS = (ADJACENT, DEGREE_EDGE)


# ---------------------------------------------------------------- generic evaluation

def _ball(G, v, r):
    dist = {v: 0}
    frontier = [v]
    for d in range(1, r + 1):
        nxt = []
        for u in frontier:
            nb = [int(G.parent[u])] if G.parent[u] >= 0 else []
            nb += G.idx[G.ptr[u]:G.ptr[u + 1]].tolist()
            for w in nb:
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return list(dist)


def transports(G, g: TestFunction, o: int, m: float = 1.0, along_foil: bool = False):
    """``(g+(o), sum_v m^{l(v,o)} g(v,o))`` by direct enumeration around ``o``."""
    plus = minus = 0.0
    lo = G.level[o]
    for v in _ball(G, o, g.reach):
        if along_foil and G.level[v] != lo:
            continue
        plus += g(G, o, v)
        minus += m ** float(lo - G.level[v]) * g(G, v, o)
    return plus, minus


def _evaluate(batch: TreeBatch, g: TestFunction, m: float, along_foil: bool):
    batch.require_radius(g.read_radius)
    if g.batch is not None and (not along_foil or g.same_generation):
        return g.batch(batch, m)
    pairs = [transports(batch, g, int(o), m, along_foil) for o in batch.roots]
    a = np.array(pairs, dtype=float).reshape(-1, 2)
    return a[:, 0], a[:, 1]


@dataclass
class _TransportJob:
    sampler: Callable
    g: TestFunction
    m: float
    along_foil: bool

    def __call__(self, size, rng):
        a, b = _evaluate(self.sampler(size, rng), self.g, self.m, self.along_foil)
        return Moments.of(a), Moments.of(b), Moments.of(a - b)


def _exact_transport(G, g: TestFunction, vertices=None, targets=None):
    n = G.n
    src = range(n) if vertices is None else vertices
    tgt = range(n) if targets is None else targets
    plus = sum((Fraction(g(G, o, v)) for o in src for v in tgt), Fraction(0))
    minus = sum((Fraction(g(G, v, o)) for o in tgt for v in src), Fraction(0))
    return plus, minus


def _is_finite_object(source) -> bool:
    if isinstance(source, Network):
        return True
    return isinstance(source, FamilyTree) and not source.boundary.any()


def mtp_test(source, g: TestFunction, N: int = 100_000, seed=None, chunk: int = DEFAULT_CHUNK,
             workers: int = 1) -> EstimatorReport:
    """``E[g+(o)]`` against ``E[g-(o)]``.

    ``source`` is either a finite :class:`Network` / boundary-free
    :class:`FamilyTree` with a uniform root (both sums computed exactly), or
    a batch sampler ``(n, rng) -> TreeBatch`` (Monte Carlo over ``N`` roots).
    """
    if _is_finite_object(source):
        plus, minus = _exact_transport(source, g)
        return EstimatorReport.exact(f"mtp[{g.name}]", plus / source.n, minus / source.n,
                                     source.n, "exact")
    return _mc_transport(source, g, 1.0, N, seed, chunk, workers, f"mtp[{g.name}]", False)


def _mc_transport(sampler, g, m, N, seed, chunk, workers, name, along_foil):
    if seed is None:
        raise ValueError("a seed is required")
    parts = map_chunks(_TransportJob(sampler, g, m, along_foil), N, seed, chunk, workers)
    a = merge_all([p[0] for p in parts])
    b = merge_all([p[1] for p in parts])
    d = merge_all([p[2] for p in parts])
    return EstimatorReport.from_diff(name, a.mean, b.mean, d.stderr, d.n)


def offspring_mtp_test(sampler, m: float, g: TestFunction, N: int = 100_000, seed=None,
                       along_foil: bool = False, chunk: int = DEFAULT_CHUNK,
                       workers: int = 1) -> EstimatorReport:
    """``E[sum_v g(o,v)] = E[sum_v m^{l(v,o)} g(v,o)]`` for offspring-invariant EFTs.

    Here ``l(v, o) = level(o) - level(v)``: a child of ``o`` sends its mass
    with weight ``1/m``.  With ``along_foil`` both sums run over the
    generation of ``o`` only, where the weight is 1.
    """
    if not m > 0:
        raise ValueError("m must be positive")
    tag = "foil_mtp" if along_foil else "offspring_mtp"
    return _mc_transport(sampler, g, float(m), N, seed, chunk, workers,
                         f"{tag}[{g.name},m={m:g}]", along_foil)


@dataclass
class _MomentJob:
    sampler: Callable
    n_max: int

    def __call__(self, size, rng):
        batch = self.sampler(size, rng)
        out = []
        for n in range(1, self.n_max + 1):
            counts, complete = batch.descendant_counts(n)
            if not complete.all():
                raise TruncationError(f"d_{n}(o) reaches outside the window")
            out.append(Moments.of(counts))
        return out


def moment_check(sampler, pi=None, n_max: int = 4, N: int = 100_000, seed=None,
                 target: Callable[[int], float] | None = None, unimodular: bool = False,
                 chunk: int = DEFAULT_CHUNK, workers: int = 1) -> list[EstimatorReport]:
    """Compare ``E[d_n(o)]`` with ``m^n`` (or with 1 when ``unimodular``) for ``n = 1..n_max``."""
    if target is None:
        if unimodular:
            target = lambda n: 1.0
        else:
            m = float(pi.mean)
            target = lambda n: m ** n
    parts = map_chunks(_MomentJob(sampler, n_max), N, seed, chunk, workers)
    reports = []
    for i in range(n_max):
        mom = merge_all([p[i] for p in parts])
        reports.append(EstimatorReport.from_diff(f"E[d_{i + 1}]", mom.mean, target(i + 1),
                                                 mom.stderr, mom.n))
    return reports


def gw_second_moments(pi, n_max: int) -> list[Fraction]:
    """``E[Z_n^2]`` for ``n = 0..n_max`` of an ordinary GW process (exact)."""
    m = Fraction(pi.mean)
    var = Fraction(pi.variance)
    out = [Fraction(1)]
    for n in range(n_max):
        out.append(m ** n * var + m * m * out[-1])
    return out


def generation_size_oracle(pi, n_max: int) -> list[Fraction]:
    """``E|L_n(o)| = m^{-n} E[Z_n^2]`` for the eternal tree of ``pi``."""
    m = Fraction(pi.mean)
    return [s / m ** n for n, s in enumerate(gw_second_moments(pi, n_max))]


def generation_size_limit(pi) -> Fraction:
    m = Fraction(pi.mean)
    return 1 + Fraction(pi.c) / (m * (1 - m))


@dataclass
class _GenJob:
    sampler: Callable
    n_max: int

    def __call__(self, size, rng):
        batch = self.sampler(size, rng)
        out = []
        for n in range(self.n_max + 1):
            anc, cut = batch.ancestors(n)
            if cut.any() or (anc < 0).any():
                raise TruncationError(f"F^{n}(o) is outside the window")
            counts, complete = batch.descendant_counts(n, anc)
            if not complete.all():
                raise TruncationError(f"L_{n}(o) reaches outside the window")
            out.append(Moments.of(counts))
        return out


def generation_size_check(sampler, pi, n_max: int = 5, N: int = 100_000, seed=None,
                          chunk: int = DEFAULT_CHUNK, workers: int = 1) -> list[EstimatorReport]:
    """``E|L_n(o)|`` against the exact oracle for a subcritical eternal GW tree."""
    m = Fraction(pi.mean)
    if m == 0:
        raise ValueError("generation_size_check needs m > 0")
    if m >= 1:
        raise ValueError("generation_size_check needs a subcritical law (m < 1)")
    oracle = generation_size_oracle(pi, n_max)
    limit = generation_size_limit(pi)
    parts = map_chunks(_GenJob(sampler, n_max), N, seed, chunk, workers)
    reports = []
    for n in range(n_max + 1):
        mom = merge_all([p[n] for p in parts])
        reports.append(EstimatorReport.from_diff(
            f"E|L_{n}|", mom.mean, float(oracle[n]), mom.stderr, mom.n,
            note=f"limit {float(limit):g}"))
    return reports


def exchange_formula_test(net, H: Callable, H2: Callable, g: TestFunction) -> EstimatorReport:
    """``lambda_H E_H[sum_{v in H'} g(o,v)] = lambda_H' E_H'[sum_{v in H} g(v,o)]``, exactly."""
    A = [v for v in range(net.n) if H(net, v)]
    B = [v for v in range(net.n) if H2(net, v)]
    plus, minus = _exact_transport(net, g, A, B)
    note = "exact" if A and B else "exact; empty subnetwork, identity vacuous"
    return EstimatorReport.exact(f"exchange[{g.name}]", plus / net.n, minus / net.n, net.n, note)


# ---------------------------------------------------------------- Mecke

def _network_graph(net: Network, root: int):
    import networkx as nx

    from .tree_core import quantize_marks

    G = nx.Graph()
    for v in range(net.n):
        mk = None if net.vmarks is None else int(quantize_marks(net.vmarks[v]))
        G.add_node(("v", v), label=f"v|{mk}|{int(v == root)}")
    for e, (a, b) in enumerate(net.edges.tolist()):
        ha, hb = (int(x) for x in quantize_marks([net.half_mark(e, 0), net.half_mark(e, 1)]))
        if a == b:
            G.add_node(("e", e), label=f"loop|{min(ha, hb)}|{max(ha, hb)}")
            G.add_edge(("v", a), ("e", e), label=f"{min(ha, hb)}")
        else:
            G.add_node(("e", e), label="edge")
            G.add_edge(("v", a), ("e", e), label=str(ha))
            G.add_edge(("v", b), ("e", e), label=str(hb))
    return G


def _classify(items):
    """Group rooted objects into isomorphism classes; returns a class id per item."""
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    ids = []
    reps: dict = {}
    for obj, root in items:
        if isinstance(obj, FamilyTree):
            key = obj.canonicalize(ordered=True, at=root)
            ids.append(reps.setdefault(("tree", key), len(reps)))
            continue
        G = _network_graph(obj, root)
        h = nx.weisfeiler_lehman_graph_hash(G, node_attr="label", edge_attr="label")
        bucket = reps.setdefault(("net", h), [])
        for cid, H in bucket:
            gm = GraphMatcher(G, H, node_match=lambda a, b: a["label"] == b["label"],
                              edge_match=lambda a, b: a["label"] == b["label"])
            if gm.is_isomorphic():
                ids.append(cid)
                break
        else:
            cid = ("net", h, len(bucket))
            bucket.append((cid, G))
            ids.append(cid)
    return ids


@dataclass(frozen=True)
class MeckeReport:
    laws_equal: bool
    bijective: bool
    tv: float
    n_classes: int

    @property
    def consistent(self) -> bool:
        return self.laws_equal == self.bijective

    def summary(self) -> str:
        return (f"mecke: laws_equal={self.laws_equal} bijective={self.bijective} "
                f"tv={self.tv:.4g} classes={self.n_classes}")


def mecke_test(family: Sequence, f, interior: Callable | None = None) -> MeckeReport:
    """Exact law of ``[G, o]`` against ``[G, f(o)]`` for a uniform member and uniform root.

    ``family`` holds finite networks or boundary-free Family Trees (ordered
    codes).  ``interior(G) -> vertices``, if given, restricts the uniform
    root to a sub-set of each member.
    """
    items, w_src, images = [], [], []
    bij = True
    for G in family:
        verts = list(range(G.n)) if interior is None else list(interior(G))
        img = [int(f(G, v)) for v in verts]
        bij &= sorted(img) == sorted(verts)
        w = Fraction(1, len(family) * len(verts))
        for v, u in zip(verts, img):
            items.append((G, v))
            items.append((G, u))
            w_src.append(w)
    cls = _classify(items)
    p: dict = {}
    q: dict = {}
    for i, w in enumerate(w_src):
        p[cls[2 * i]] = p.get(cls[2 * i], Fraction(0)) + w
        q[cls[2 * i + 1]] = q.get(cls[2 * i + 1], Fraction(0)) + w
    tv = tv_distance(p, q)
    return MeckeReport(p == q, bool(bij), float(tv), len(set(cls)))


# ---------------------------------------------------------------- independence

@dataclass
class _PairJob:
    sampler: Callable

    def __call__(self, size, rng):
        batch = self.sampler(size, rng)
        batch.require_radius(2)
        o = batch.roots
        p = batch.parent[o]
        if (p < 0).any():
            raise TruncationError("root without parent")
        return batch.d1[o], batch.d1[p] - 1


def egwt_independence_probe(sampler, N: int = 100_000, seed=None, alpha: float = 0.01,
                            chunk: int = DEFAULT_CHUNK, workers: int = 1) -> EstimatorReport:
    """Chi-square test of ``d_1(o)`` against the number of siblings of ``o``.

    The p-value is reported through ``z = Phi^{-1}(1 - p/2)`` with threshold
    ``Phi^{-1}(1 - alpha/2)``, so the verdict is ``p > alpha``.
    """
    parts = map_chunks(_PairJob(sampler), N, seed, chunk, workers)
    x = np.concatenate([a for a, _ in parts])
    y = np.concatenate([b for _, b in parts])
    xs, xi = np.unique(x, return_inverse=True)
    ys, yi = np.unique(y, return_inverse=True)
    thr = float(stats.norm.isf(alpha / 2))
    if len(xs) < 2 or len(ys) < 2:
        return EstimatorReport("independence", 0.0, 0.0, 0.0, 0.0, len(x), thr, "degenerate; p=1")
    table = np.zeros((len(xs), len(ys)), dtype=np.int64)
    np.add.at(table, (xi, yi), 1)
    chi2, p, dof, _ = stats.chi2_contingency(table, correction=False)
    z = float(stats.norm.isf(p / 2)) if p > 0 else math.inf
    return EstimatorReport("independence", float(chi2), float(dof), 0.0, z, len(x), thr,
                           f"p={p:.4g}")


class _SiblingCopyKernel:
    """Spine like an eternal GW tree, but ``d_1(o)`` is forced to the number of siblings of ``o``."""

    def __init__(self, pi):
        from .samplers import _GWKernel

        self.base = _GWKernel(pi, True)
        self.z1 = None

    def labels(self, t):
        return None

    def spine_types(self, B, H, rng):
        t = np.zeros((B, H + 1), dtype=np.int64)
        t[:, 0] = 1
        return t

    def spine_children(self, ptypes, ctypes, plevel, trees, rng):
        cnt, flat, pos = self.base.spine_children(ptypes, ctypes, plevel, trees, rng)
        if plevel == -1:
            self.z1 = cnt.copy()
        return cnt, flat, pos

    def children(self, types, levels, trees, rng):
        cnt = self.base.pi.sample(rng, len(types))
        root = types == 1
        cnt[root] = self.z1[trees[root]] - 1
        return cnt, np.zeros(int(cnt.sum()), dtype=np.int64)


@dataclass(frozen=True)
class SiblingCopyControl:
    """Negative control for the independence probe: ``d_1(o)`` equals the sibling count."""

    pi: object
    spine_height: int = 2

    def __call__(self, n, rng):
        from .samplers import _grow

        return _grow(_SiblingCopyKernel(self.pi), n, self.spine_height, self.spine_height,
                     None, rng, True)


# ---------------------------------------------------------------- laws

def empirical_law(codes: Iterable) -> dict:
    counts: dict = {}
    total = 0
    for c in codes:
        counts[c] = counts.get(c, 0) + 1
        total += 1
    return {k: v / total for k, v in counts.items()}


def tv_distance(p: dict, q: dict):
    keys = set(p) | set(q)
    return sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys) / 2


# ---------------------------------------------------------------- exact ball laws

def _gw_bushes(pi, depth: int) -> list:
    """Ordered GW bushes cut ``depth`` generations below the top: ``(children, weight)``."""
    if depth <= 0:
        return [(None, Fraction(1))]
    below = _gw_bushes(pi, depth - 1)
    out = []
    for k, p in pi.as_dict().items():
        for combo in itertools.product(below, repeat=k):
            w = Fraction(p)
            for _, q in combo:
                w *= q
            out.append((tuple(c for c, _ in combo), w))
    return out


def _attach(parent, boundary, shape, at):
    if shape is None:
        boundary[at] = True
        return
    for c in shape:
        parent.append(at)
        boundary.append(False)
        _attach(parent, boundary, c, len(parent) - 1)


def egwt_ball_law(pi, radius: int) -> dict:
    """Exact law of the unordered, unlabelled radius-``radius`` code of an eternal GW tree.

    Enumerates the size-biased spine, the bushes hanging from it and the
    descendants of the root, so it is only practical for small supports and
    radii.
    """
    hat = pi.size_biased()
    law: dict = {}
    downs = _gw_bushes(pi, radius)
    spine_choices = []
    for i in range(1, radius + 1):
        opts = []
        for k, p in hat.as_dict().items():
            for sibs in itertools.product(_gw_bushes(pi, radius - i - 1) if radius - i - 1 >= 0 else [(None, 1)],
                                          repeat=k - 1):
                w = Fraction(p)
                for _, q in sibs:
                    w *= q
                opts.append((tuple(s for s, _ in sibs) if radius - i - 1 >= 0 else (), w))
        spine_choices.append(opts)
    for down, wd in downs:
        for path in itertools.product(*spine_choices):
            parent, boundary = [-1], [False]
            _attach(parent, boundary, down, 0)
            below = 0
            w = wd
            for sibs, ws in path:
                parent.append(-1)
                boundary.append(False)
                top = len(parent) - 1
                parent[below] = top
                for s in sibs:
                    parent.append(top)
                    boundary.append(False)
                    _attach(parent, boundary, s, len(parent) - 1)
                below = top
                w *= ws
            boundary[below] = True
            code = FamilyTree(parent, 0, boundary=boundary).canonicalize(radius, labelled=False)
            law[code] = law.get(code, Fraction(0)) + w
    return law


def canopy_ball_law(d: int, d_tilde, radius: int) -> dict:
    """Exact law of the unordered, unlabelled radius-``radius`` code of the Canopy tree.

    Layers at or above ``radius`` give the same ball, so ``P[I >= radius]``
    is lumped onto one full ``d``-ary window.
    """
    q = 1 / Fraction(d_tilde)
    height = 2 * radius + 1
    parent = [-1]
    layer = [height]
    frontier = [0]
    for h in range(height, 0, -1):
        nxt = []
        for v in frontier:
            for _ in range(d):
                parent.append(v)
                layer.append(h - 1)
                nxt.append(len(parent) - 1)
        frontier = nxt
    boundary = [p < 0 for p in parent]
    tree = FamilyTree(parent, 0, boundary=boundary)
    law: dict = {}
    for i in range(radius + 1):
        v = len(parent) - 1
        while layer[v] < i:
            v = parent[v]
        w = (1 - q) * q ** i if i < radius else q ** radius
        code = tree.canonicalize(radius, at=v, labelled=False)
        law[code] = law.get(code, Fraction(0)) + w
    return law
