"""Windows of the generalised Diestel-Leader graph built on two eternal trees.

Vertices are pairs ``(v1, v2)`` whose generation offsets from ``(o1, o2)``
cancel; ``(v1, v2)`` points to every pair in ``{F(v1)} x children(v2)``.
Pair marks ``t(v1, v2)`` in ``[0, 1]^2`` come from a counter-based hash of
``(key, v1, v2)``, so the full window and the vectorised estimators below
see exactly the same marks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .dynamics import VertexShift
from .parallel import DEFAULT_CHUNK, Moments, map_chunks, merge_all
from .samplers import EGWTSampler, OffspringDistribution, _GWKernel, _grow
from .tree_core import FamilyTree, TreeBatch, TruncationError, expand
from .verify import EstimatorReport

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)


def _mix(x):
    x = x + _GOLD
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def pair_marks(key, v1, v2, coord: int) -> np.ndarray:
    """Uniform ``[0, 1)`` mark coordinate ``coord`` of the pairs ``(v1, v2)`` under ``key``."""
    with np.errstate(over="ignore"):
        k = np.asarray(key, dtype=np.uint64)
        a = np.asarray(v1, dtype=np.int64).astype(np.uint64)
        b = np.asarray(v2, dtype=np.int64).astype(np.uint64)
        h = _mix(_mix(_mix(k ^ np.uint64(coord + 1)) ^ a) ^ (b * np.uint64(0x632BE59BD9B4E019)))
    return (h >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class DLWindow:
    """Finite window of the generalised Diestel-Leader graph.

    Parameters
    ----------
    T1, T2 : FamilyTree
        Windows of the two trees, exact to at least ``radius``.
    radius : int
        Only ``v1`` and ``v2`` within this distance of ``o1``, ``o2`` are used.
    key : int
        Seed of the pair marks.
    """

    def __init__(self, T1: FamilyTree, T2: FamilyTree, radius: int, key: int = 0,
                 m1: float | None = None, m2: float | None = None):
        for name, T in (("T1", T1), ("T2", T2)):
            if T.valid_radius < radius:
                raise TruncationError(f"{name} is exact only to radius {T.valid_radius} < {radius}")
        ball1 = T1.dist <= radius
        ball2 = T2.dist <= radius
        interior2 = ball2 & ~T2.boundary
        if np.any(T2.d1[interior2] == 0):
            raise ValueError("T2 has a childless interior vertex")
        self.T1, self.T2, self.radius, self.key = T1, T2, radius, int(key)
        self.m1, self.m2 = m1, m2
        self.ball1, self.ball2 = ball1, ball2
        v1s, v2s = [], []
        by2: dict[int, np.ndarray] = {}
        for L in np.unique(T2.level[ball2]):
            by2[int(L)] = np.flatnonzero(ball2 & (T2.level == L))
        for L in np.unique(T1.level[ball1]):
            a = np.flatnonzero(ball1 & (T1.level == L))
            b = by2.get(-int(L))
            if b is None:
                continue
            v1s.append(np.repeat(a, len(b)))
            v2s.append(np.tile(b, len(a)))
        self.v1 = np.concatenate(v1s)
        self.v2 = np.concatenate(v2s)
        self.n = len(self.v1)
        self.index = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.v1, self.v2))}
        self.root = self.index[(T1.root, T2.root)]
        self.marks = np.stack([pair_marks(self.key, self.v1, self.v2, 0),
                               pair_marks(self.key, self.v1, self.v2, 1)], axis=1)
        self._out = None
        self._in = None
        self._f = None

    @property
    def level(self) -> np.ndarray:
        """Generation of ``v1`` below ``o1``; the ``v2`` side has the opposite generation."""
        return self.T1.level[self.v1]

    def _neighbourhoods(self):
        T1, T2 = self.T1, self.T2
        out, out_ok, inn, in_ok = [], [], [], []
        for a, b in zip(self.v1.tolist(), self.v2.tolist()):
            p1 = int(T1.parent[a])
            kids2 = T2.children(b).tolist()
            tg = [self.index.get((p1, c), -1) for c in kids2] if p1 >= 0 else []
            out.append([t for t in tg if t >= 0])
            out_ok.append(p1 >= 0 and not T2.boundary[b] and len(tg) == len(kids2) and min(tg, default=0) >= 0)
            p2 = int(T2.parent[b])
            kids1 = T1.children(a).tolist()
            sr = [self.index.get((c, p2), -1) for c in kids1] if p2 >= 0 else []
            inn.append([s for s in sr if s >= 0])
            in_ok.append(p2 >= 0 and not T1.boundary[a] and len(sr) == len(kids1) and min(sr, default=0) >= 0)
        self._out, self._in = out, inn
        self._out_ok = np.array(out_ok, dtype=bool)
        self._in_ok = np.array(in_ok, dtype=bool)

    @property
    def out_complete(self) -> np.ndarray:
        """Vertices whose whole out-neighbourhood lies in the window."""
        if self._out is None:
            self._neighbourhoods()
        return self._out_ok

    @property
    def in_complete(self) -> np.ndarray:
        if self._in is None:
            self._neighbourhoods()
        return self._in_ok

    def out_neighbors(self, x: int) -> list:
        if self._out is None:
            self._neighbourhoods()
        return self._out[x]

    def in_neighbors(self, x: int) -> list:
        if self._in is None:
            self._neighbourhoods()
        return self._in[x]

    @property
    def out_degree(self) -> np.ndarray:
        if self._out is None:
            self._neighbourhoods()
        return np.array([len(o) for o in self._out], dtype=np.int64)

    @property
    def in_degree(self) -> np.ndarray:
        if self._in is None:
            self._neighbourhoods()
        return np.array([len(i) for i in self._in], dtype=np.int64)

    def check_identities(self) -> dict:
        """Level-sum and degree identities on every vertex whose neighbourhood is inside the window."""
        if self._out is None:
            self._neighbourhoods()
        lvl = (self.T1.level[self.v1] + self.T2.level[self.v2]) == 0
        out_ok = self.out_degree[self.out_complete] == self.T2.d1[self.v2[self.out_complete]]
        in_ok = self.in_degree[self.in_complete] == self.T1.d1[self.v1[self.in_complete]]
        return {"level_sum": bool(lvl.all()), "out_degree": bool(out_ok.all()),
                "in_degree": bool(in_ok.all()), "n_interior": int(self.out_complete.sum())}

    @property
    def f(self) -> np.ndarray:
        """Image of the Diestel-Leader shift; -1 where the window cannot decide."""
        if self._f is None:
            if self._out is None:
                self._neighbourhoods()
            img = np.full(self.n, -1, dtype=np.int64)
            for x in np.flatnonzero(self.out_complete):
                cand = self._out[x]
                k = int(self.marks[x, 0] * len(cand))
                order = sorted(cand, key=lambda y: self.marks[y, 1])
                img[x] = order[k]
            self._f = img
        return self._f

    def f_children(self, x: int):
        """``f``-children of ``x`` and whether that set is exact."""
        cand = self.in_neighbors(x)
        ok = bool(self.in_complete[x]) and all(self.f[c] >= 0 for c in cand)
        return [c for c in cand if self.f[c] == x], ok

    def f_component_ball(self, radius: int) -> FamilyTree:
        """Radius-``radius`` ball of the ``f``-graph component of the root, as a Family Tree."""
        ids = {self.root: 0}
        parent = [-1]
        boundary = [False]
        frontier = [self.root]
        for d in range(radius):
            nxt = []
            for x in frontier:
                k = ids[x]
                up = int(self.f[x])
                kids, ok = self.f_children(x)
                if up < 0 or not ok:
                    boundary[k] = True
                    continue
                if up not in ids:
                    ids[up] = len(parent)
                    parent.append(-1)
                    boundary.append(False)
                    nxt.append(up)
                parent[k] = ids[up]
                for c in kids:
                    if c not in ids:
                        ids[c] = len(parent)
                        parent.append(k)
                        boundary.append(False)
                        nxt.append(c)
            frontier = nxt
        for x in frontier:
            boundary[ids[x]] = True
        # the top of the ball has its parent cut
        par = np.array(parent, dtype=np.int64)
        bd = np.array(boundary, dtype=bool)
        bd[par < 0] = True
        return FamilyTree(par, 0, boundary=bd)

    def export(self) -> str:
        lines = []
        for i in range(self.n):
            lines.append(f"({int(self.v1[i])},{int(self.v2[i])}) {int(self.level[i])} "
                         f"{int(self.out_degree[i])} {int(self.in_degree[i])}")
        return "\n".join(lines) + "\n"


def build_dl_window(T1: FamilyTree, T2: FamilyTree, radius: int, key: int = 0, **kw) -> DLWindow:
    return DLWindow(T1, T2, radius, key, **kw)


def _dl_apply(G: DLWindow, x: int) -> int:
    return int(G.f[x])


def dl_shift(win: DLWindow | None = None) -> VertexShift:
    """The shift picking a uniform member of ``{F(v1)} x children(v2)`` from the pair marks.

    The first mark coordinate of ``x`` selects an index ``k`` uniformly in
    ``0..b-1`` (``b`` candidates); the candidate with the ``k``-th smallest
    second coordinate is the image.
    """
    return VertexShift("diestel_leader", _dl_apply)


# ---------------------------------------------------------------- vectorised root statistics

def _local(batch: TreeBatch, v):
    return v - batch.tree_ptr[batch.tree_of[v]]


def root_statistics(B1: TreeBatch, B2: TreeBatch, keys) -> dict:
    """``d_1`` of the root in the ``f``-graph, with ``a = d_1(o1)``, ``b = d_1(F(o2))``, ``d_1(o2)``.

    Computes exactly what :class:`DLWindow` would compute with the same keys,
    but only touches the pairs that decide the ``f``-children of the root.
    """
    B1.require_radius(1)
    B2.require_radius(2)
    n = len(B1)
    o1, o2 = B1.roots, B2.roots
    p2 = B2.parent[o2]
    if np.any(p2 < 0):
        raise TruncationError("F(o2) is outside the window")
    kids1, own1 = expand(B1.ptr, B1.idx, o1)
    sib, own2 = expand(B2.ptr, B2.idx, p2)
    b = np.bincount(own2, minlength=n)
    t2 = pair_marks(keys[own2], _local(B1, o1)[own2], _local(B2, sib), 1)
    t2_root = pair_marks(keys, _local(B1, o1), _local(B2, o2), 1)
    rank = np.bincount(own2, weights=t2 < t2_root[own2], minlength=n).astype(np.int64)
    t1 = pair_marks(keys[own1], _local(B1, kids1), _local(B2, p2)[own1], 0)
    hit = np.floor(t1 * b[own1]).astype(np.int64) == rank[own1]
    d1 = np.bincount(own1, weights=hit, minlength=n).astype(np.int64)
    return {"d1": d1, "a": B1.d1[o1], "b": b, "out": B2.d1[o2]}


@dataclass(frozen=True)
class DLPairSampler:
    """Independent eternal GW windows ``T1``, ``T2`` and a mark key per pair."""

    pi1: OffspringDistribution
    pi2: OffspringDistribution
    radius: int = 2

    @property
    def ratio(self) -> float:
        return float(self.pi1.mean) / float(self.pi2.mean)

    def __call__(self, n, rng):
        if min(self.pi2.support) < 1:
            raise ValueError("every vertex of T2 needs at least one child")
        B1 = EGWTSampler(self.pi1, self.radius)(n, rng)
        B2 = EGWTSampler(self.pi2, self.radius)(n, rng)
        keys = rng.integers(0, 2**63 - 1, n, dtype=np.int64).astype(np.uint64)
        return B1, B2, keys


@dataclass
class _DLJob:
    sampler: DLPairSampler

    def __call__(self, size, rng):
        return root_statistics(*self.sampler(size, rng))


def _collect(sampler, N, seed, chunk, workers):
    parts = map_chunks(_DLJob(sampler), N, seed, chunk, workers)
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def dl_offspring_check(sampler: DLPairSampler, N: int = 100_000, seed=None, alpha: float = 1e-3,
                       min_group: int = 200, chunk: int = DEFAULT_CHUNK,
                       workers: int = 1) -> list[EstimatorReport]:
    """``E[d_1(o)]`` in the ``f``-component against ``m1/m2``, and the conditional binomial law.

    The first report is the mean check.  Each further report is a
    chi-square goodness-of-fit of ``d_1(o)`` given ``(a, b)`` against
    ``Binomial(a, 1/b)`` for groups with at least ``min_group`` samples,
    expressed through ``z = Phi^{-1}(1 - p/2)``.
    """
    st = _collect(sampler, N, seed, chunk, workers)
    mom = Moments.of(st["d1"])
    reports = [EstimatorReport.from_diff("dl:E[d_1(o)]", mom.mean, sampler.ratio, mom.stderr, mom.n)]
    thr = float(stats.norm.isf(alpha / 2))
    pairs = np.stack([st["a"], st["b"]], axis=1)
    for a, b in np.unique(pairs, axis=0):
        sel = (st["a"] == a) & (st["b"] == b)
        x = st["d1"][sel]
        name = f"dl:binom(a={a},b={b})"
        if a == 0:
            ok = bool(np.all(x == 0))
            reports.append(EstimatorReport(name, float(x.mean()), 0.0, 0.0, 0.0 if ok else np.inf,
                                           len(x), thr, "a=0"))
            continue
        if len(x) < min_group:
            continue
        obs = np.bincount(x, minlength=a + 1)[: a + 1].astype(float)
        if np.any(x > a):
            reports.append(EstimatorReport(name, float(x.max()), float(a), 0.0, np.inf, len(x), thr,
                                           "value above a"))
            continue
        exp = stats.binom.pmf(np.arange(a + 1), a, 1.0 / b) * len(x)
        obs, exp = _pool(obs, exp)
        if len(obs) < 2:
            p = 1.0
        else:
            p = float(stats.chisquare(obs, exp).pvalue)
        z = float(stats.norm.isf(p / 2)) if p > 0 else np.inf
        reports.append(EstimatorReport(name, float(x.mean()), float(a) / b, 0.0, z, len(x), thr,
                                       f"p={p:.3g}"))
    return reports


def _pool(obs, exp, min_exp=5.0):
    """Merge adjacent bins until every expected count reaches ``min_exp``."""
    o_out, e_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_exp:
            o_out.append(o_acc)
            e_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_out:
            o_out[-1] += o_acc
            e_out[-1] += e_acc
        else:
            o_out.append(o_acc)
            e_out.append(e_acc)
    return np.array(o_out), np.array(e_out)


def dl_mtp_test(sampler: DLPairSampler, weighted: bool = True, function: str = "f_parent",
                N: int = 100_000, seed=None, chunk: int = DEFAULT_CHUNK,
                workers: int = 1) -> EstimatorReport:
    """Mass transport on the Diestel-Leader graph, with or without the cocycle.

    Mass sent from ``v`` to ``o`` is weighted by ``(m1/m2)^(level(o1) - level(v1))``,
    i.e. by ``m2/m1`` from the pairs one generation below ``o``.

    ``function`` is ``"f_parent"`` (``g(x, y) = 1{y = f(x)}``) or
    ``"edge"`` (``g(x, y) = 1{x -> y}``).
    """
    st = _collect(sampler, N, seed, chunk, workers)
    w = 1.0 / sampler.ratio if weighted else 1.0
    if function == "f_parent":
        plus = np.ones(len(st["d1"]))
        minus = st["d1"] * w
    elif function == "edge":
        plus = st["out"].astype(float)
        minus = st["a"] * w
    else:
        raise ValueError(f"unknown function {function!r}")
    a, b, d = Moments.of(plus), Moments.of(minus), Moments.of(plus - minus)
    tag = "weighted" if weighted else "unweighted"
    return EstimatorReport.from_diff(f"dl:{tag}_mtp[{function}]", a.mean, b.mean, d.stderr, d.n)


def sample_dl_windows(pi1, pi2, radius: int, count: int, seed) -> list[DLWindow]:
    """``count`` full windows built on independent eternal GW trees."""
    from .parallel import as_generator

    rng = as_generator(seed)
    pi1, pi2 = OffspringDistribution.parse(pi1), OffspringDistribution.parse(pi2)
    B1 = EGWTSampler(pi1, radius)(count, rng)
    B2 = EGWTSampler(pi2, radius)(count, rng)
    keys = rng.integers(0, 2**63 - 1, count, dtype=np.int64)
    return [DLWindow(B1[i], B2[i], radius, int(keys[i]), float(pi1.mean), float(pi2.mean))
            for i in range(count)]


# ---------------------------------------------------------------- age-dependent description

class _AgeKernel:
    """Offspring of the ``f``-component: potential children thinned by ``1/b_level``."""

    def __init__(self, pi1, pi2, H, R):
        self.base = _GWKernel(pi1, True)
        self.pi2, self.hat2 = pi2, pi2.size_biased()
        self.H, self.R = H, R
        self.b = None

    def labels(self, t):
        return None

    def spine_types(self, B, H, rng):
        neg = self.pi2.sample(rng, (B, self.H))
        pos = self.hat2.sample(rng, (B, self.R + 1))
        # column j + H holds b_j for j = -H..R
        self.b = np.concatenate([neg, pos], axis=1)
        return np.zeros((B, H + 1), dtype=np.int64)

    def _keep(self, n, level, trees, rng):
        return rng.binomial(n, 1.0 / self.b[trees, level + self.H])

    def children(self, types, levels, trees, rng):
        cnt = self._keep(self.base.pi.sample(rng, len(types)), levels, trees, rng)
        return cnt, np.zeros(int(cnt.sum()), dtype=np.int64)

    def spine_children(self, ptypes, ctypes, plevel, trees, rng):
        pot = self.base.hat.sample(rng, len(ptypes))
        cnt = 1 + self._keep(pot - 1, np.full(len(ptypes), plevel), trees, rng)
        pos = np.floor(rng.random(len(ptypes)) * cnt).astype(np.int64)
        return cnt, np.zeros(int(cnt.sum()), dtype=np.int64), pos


@dataclass(frozen=True)
class AgeDependentSampler:
    """The ``f``-component of the root as an age-dependent eternal GW tree."""

    pi1: OffspringDistribution
    pi2: OffspringDistribution
    spine_height: int

    def __call__(self, n, rng):
        H = self.spine_height
        return _grow(_AgeKernel(self.pi1, self.pi2, H, H), n, H, H, None, rng, True)
