"""Seeded samplers for Galton-Watson type trees and their eternal versions.

Every sampler is a pure function of its parameters and a seed.  The batch
samplers (``GWTSampler``, ``EGWTSampler`` ...) are small frozen objects with
signature ``sampler(n, rng) -> TreeBatch``; they grow all ``n`` windows at
once, one graph-distance layer at a time.

Windows are graph-distance balls: with ``R = min(spine_height, depth_cap)``
a vertex is expanded iff its distance from the root is ``< R``.  Everything
at distance ``R`` and the spine vertices above it are flagged as boundary,
so ``valid_radius == R`` unless a population cap or extinction intervenes.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .parallel import as_generator
from .tree_core import FamilyTree, TreeBatch


def _num(p):
    if isinstance(p, Fraction):
        return p
    if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
        return Fraction(int(p))
    if isinstance(p, str):
        return Fraction(p.strip())
    return float(p)


class OffspringDistribution:
    """Finite-support law on the non-negative integers.

    Probabilities given as ``Fraction``, ``int`` or strings such as ``"1/3"``
    are kept exact; any float switches the whole law to double mode.

    >>> pi = OffspringDistribution({0: "1/2", 2: "1/2"})
    >>> pi.mean, pi.c
    (Fraction(1, 1), Fraction(1, 1))
    """

    def __init__(self, pmf: Mapping[int, object]):
        items = sorted((int(k), _num(p)) for k, p in dict(pmf).items())
        if not items:
            raise ValueError("empty offspring law")
        if any(k < 0 for k, _ in items):
            raise ValueError("offspring counts must be non-negative")
        if any(p <= 0 for _, p in items):
            raise ValueError("probabilities must be positive")
        self.exact = all(isinstance(p, Fraction) for _, p in items)
        if not self.exact:
            items = [(k, float(p)) for k, p in items]
        total = sum(p for _, p in items)
        if self.exact and total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if not self.exact and abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        self.support = tuple(k for k, _ in items)
        self.probs = tuple(p for _, p in items)
        self._k = np.array(self.support, dtype=np.int64)
        cdf = np.cumsum([float(p) for p in self.probs])
        cdf[-1] = 1.0
        self._cdf = cdf

    @classmethod
    def parse(cls, spec) -> "OffspringDistribution":
        """Accept ``"0:1/2,2:1/2"``, ``[[k, num, den], ...]`` or a mapping."""
        if isinstance(spec, OffspringDistribution):
            return spec
        if isinstance(spec, Mapping):
            return cls(spec)
        if isinstance(spec, str):
            s = spec.strip()
            if s.startswith("["):
                return cls.parse(ast.literal_eval(s))
            return cls({int(k): v for k, v in (part.split(":") for part in s.split(","))})
        pmf = {}
        for row in spec:
            k, a, b = row
            pmf[int(k)] = Fraction(int(a), int(b)) if isinstance(a, int) and isinstance(b, int) else float(a) / float(b)
        return cls(pmf)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def pmf(self, k: int):
        return self.as_dict().get(k, Fraction(0) if self.exact else 0.0)

    def moment(self, fn):
        return sum(fn(k) * p for k, p in zip(self.support, self.probs))

    @property
    def mean(self):
        return self.moment(lambda k: k)

    @property
    def c(self):
        """Second factorial moment ``sum k(k-1) pi_k``."""
        return self.moment(lambda k: k * (k - 1))

    @property
    def variance(self):
        m = self.mean
        return self.moment(lambda k: k * k) - m * m

    def size_biased(self) -> "OffspringDistribution":
        m = self.mean
        if m == 0:
            raise ValueError("the size-biased law needs a positive mean")
        return OffspringDistribution({k: k * p / m for k, p in zip(self.support, self.probs) if k > 0})

    def sample(self, rng, size) -> np.ndarray:
        u = rng.random(size)
        return self._k[np.minimum(np.searchsorted(self._cdf, u, side="right"), len(self._k) - 1)]

    def __eq__(self, other):
        return isinstance(other, OffspringDistribution) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(tuple(self.as_dict().items()))

    def __repr__(self):
        body = ", ".join(f"{k}: {p}" for k, p in zip(self.support, self.probs))
        return f"OffspringDistribution({{{body}}})"


def size_biased(pi: OffspringDistribution) -> OffspringDistribution:
    """``pi_hat(k) = k pi(k) / m``."""
    return OffspringDistribution.parse(pi).size_biased()


class _SeqTable:
    """Child-type sequences and the laws that pick among them."""

    def __init__(self):
        self.seqs: list[tuple[int, ...]] = []
        self._index: dict = {}
        self.laws: list[tuple[np.ndarray, np.ndarray]] = []

    def add_law(self, pairs) -> int:
        ids, probs = [], []
        for seq, p in pairs:
            seq = tuple(sorted(seq))
            if seq not in self._index:
                self._index[seq] = len(self.seqs)
                self.seqs.append(seq)
            ids.append(self._index[seq])
            probs.append(float(p))
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        self.laws.append((np.array(ids, dtype=np.int64), cdf))
        return len(self.laws) - 1

    def freeze(self):
        lens = np.array([len(s) for s in self.seqs], dtype=np.int64)
        self.start = np.r_[0, np.cumsum(lens)[:-1]].astype(np.int64)
        self.length = lens
        self.flat = np.array([t for s in self.seqs for t in s], dtype=np.int64)
        return self

    def draw(self, law: int, rng, size) -> np.ndarray:
        ids, cdf = self.laws[law]
        j = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(ids) - 1)
        return ids[j]

    def draw_grouped(self, laws: np.ndarray, rng) -> np.ndarray:
        out = np.empty(len(laws), dtype=np.int64)
        for law in np.unique(laws):
            sel = np.flatnonzero(laws == law)
            out[sel] = self.draw(int(law), rng, len(sel))
        return out

    def expand(self, seq_ids):
        counts = self.length[seq_ids]
        owner = np.repeat(np.arange(len(seq_ids)), counts)
        offs = np.arange(owner.size) - np.repeat(np.cumsum(counts) - counts, counts)
        return counts, self.flat[self.start[seq_ids[owner]] + offs]


class _GWKernel:
    """Single-type kernel: children ~ pi, spine vertices ~ pi_hat."""

    def __init__(self, pi: OffspringDistribution, eternal: bool):
        self.pi = pi
        self.hat = pi.size_biased() if eternal else None

    def labels(self, t):
        return None

    def root_types(self, B, rng):
        return np.zeros(B, dtype=np.int64)

    def spine_types(self, B, H, rng):
        return np.zeros((B, H + 1), dtype=np.int64)

    def children(self, types, levels, trees, rng):
        cnt = self.pi.sample(rng, len(types))
        return cnt, np.zeros(int(cnt.sum()), dtype=np.int64)

    def spine_children(self, ptypes, ctypes, plevel, trees, rng):
        cnt = self.hat.sample(rng, len(ptypes))
        pos = np.floor(rng.random(len(ptypes)) * cnt).astype(np.int64)
        return cnt, np.zeros(int(cnt.sum()), dtype=np.int64), pos


def _grow(kernel, B: int, H: int, R: int, pop_cap, rng, eternal: bool,
          below: int | None = None) -> TreeBatch:
    """Grow ``B`` windows of radius ``R``; the root's own descendants go ``below`` generations deep."""
    below = R if below is None else max(below, R)
    parts = {k: [] for k in ("parent", "rank", "type", "level", "tree")}
    boundary_ids = []
    layers: dict[int, list] = {}
    nxt = 0

    def add(parent, rank, types, level, tree):
        nonlocal nxt
        n = len(parent)
        ids = np.arange(nxt, nxt + n, dtype=np.int64)
        nxt += n
        parts["parent"].append(np.asarray(parent, dtype=np.int64))
        parts["rank"].append(np.asarray(rank, dtype=np.int64))
        parts["type"].append(np.asarray(types, dtype=np.int64))
        parts["level"].append(np.asarray(level, dtype=np.int64))
        parts["tree"].append(np.asarray(tree, dtype=np.int64))
        return ids

    trees = np.arange(B, dtype=np.int64)
    if eternal:
        T = kernel.spine_types(B, H, rng)
        spine = np.arange(B * (H + 1), dtype=np.int64).reshape(B, H + 1)
        par = np.full((B, H + 1), -1, dtype=np.int64)
        par[:, :-1] = spine[:, 1:]
        lev = np.broadcast_to(-np.arange(H + 1), (B, H + 1))
        rank = np.zeros((B, H + 1), dtype=np.int64)
        add(par.ravel(), rank.ravel(), T.ravel(), lev.ravel(), np.repeat(trees, H + 1))
        cut = np.arange(H + 1) >= R
        boundary_ids.append(spine[:, cut].ravel())
        rank_store = parts["rank"][0].reshape(B, H + 1)
        for i in range(1, R):
            cnt, ctypes, pos = kernel.spine_children(T[:, i], T[:, i - 1], -i, trees, rng)
            owner = np.repeat(trees, cnt)
            offs = np.arange(owner.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            keep = offs != pos[owner]
            rank_store[:, i - 1] = pos
            ow = owner[keep]
            ids = add(spine[ow, i], offs[keep], ctypes[keep], np.full(ow.size, 1 - i), ow)
            layers.setdefault(i + 1, []).append((ids, ctypes[keep], np.full(ow.size, 1 - i), ow,
                                                 np.full(ow.size, R)))
        layers.setdefault(0, []).append((spine[:, 0], T[:, 0], np.zeros(B, dtype=np.int64), trees,
                                         np.full(B, below)))
    else:
        t0 = kernel.root_types(B, rng)
        ids = add(np.full(B, -1), np.zeros(B), t0, np.zeros(B), trees)
        layers[0] = [(ids, t0, np.zeros(B, dtype=np.int64), trees, np.full(B, R))]
    roots = np.arange(B, dtype=np.int64) * ((H + 1) if eternal else 1)

    size = np.bincount(np.concatenate(parts["tree"]), minlength=B)
    stopped = np.zeros(B, dtype=bool)
    cap = np.inf if pop_cap is None else pop_cap
    for k in range(below + 1):
        if k not in layers:
            continue
        fid, ftype, flev, ftree, flim = (np.concatenate(x) for x in zip(*layers.pop(k)))
        last = flim == k
        boundary_ids.append(fid[last])
        fid, ftype, flev, ftree, flim = fid[~last], ftype[~last], flev[~last], ftree[~last], flim[~last]
        if fid.size == 0:
            continue
        cnt, ctypes = kernel.children(ftype, flev, ftree, rng)
        add_per_tree = np.bincount(ftree, weights=cnt, minlength=B).astype(np.int64)
        stopped |= (size + add_per_tree > cap)
        halt = stopped[ftree]
        boundary_ids.append(fid[halt])
        owner = np.repeat(np.arange(len(fid)), cnt)
        offs = np.arange(owner.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        ok = ~halt[owner]
        owner, offs, ctypes = owner[ok], offs[ok], ctypes[ok]
        if owner.size:
            ct = ftree[owner]
            ids = add(fid[owner], offs, ctypes, flev[owner] + 1, ct)
            size += np.bincount(ct, minlength=B)
            layers.setdefault(k + 1, []).append((ids, ctypes, flev[owner] + 1, ct, flim[owner]))

    parent = np.concatenate(parts["parent"])
    rank = np.concatenate(parts["rank"])
    types = np.concatenate(parts["type"])
    level = np.concatenate(parts["level"])
    tree = np.concatenate(parts["tree"])
    boundary = np.zeros(len(parent), dtype=bool)
    if boundary_ids:
        boundary[np.concatenate(boundary_ids)] = True

    order = np.argsort(tree, kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    parent = parent[order]
    parent = np.where(parent >= 0, inv[np.maximum(parent, 0)], -1)
    tree_ptr = np.r_[0, np.cumsum(np.bincount(tree, minlength=B))]
    return TreeBatch(parent, tree_ptr, inv[roots], rank=rank[order], boundary=boundary[order],
                     vtype=kernel.labels(types[order]), level=level[order])


def _first(batch: TreeBatch) -> FamilyTree:
    return batch[0]


@dataclass(frozen=True)
class GWTSampler:
    """Ordinary Galton-Watson trees rooted at the ancestor, cut at ``depth_cap``."""

    pi: OffspringDistribution
    depth_cap: int
    pop_cap: int | None = None

    def __call__(self, n: int, rng) -> TreeBatch:
        if self.depth_cap < 0:
            raise ValueError("depth_cap must be non-negative")
        return _grow(_GWKernel(self.pi, False), n, 0, self.depth_cap, self.pop_cap, rng, False)


@dataclass(frozen=True)
class EGWTSampler:
    """Eternal Galton-Watson trees: a spine of size-biased vertices with GW bushes.

    The window is exact to ``radius = min(spine_height, depth_cap)`` around
    the root; ``descendant_depth`` lets the root's own subtree go deeper.
    """

    pi: OffspringDistribution
    spine_height: int
    depth_cap: int | None = None
    pop_cap: int | None = None
    descendant_depth: int | None = None

    @property
    def radius(self) -> int:
        return self.spine_height if self.depth_cap is None else min(self.spine_height, self.depth_cap)

    def __call__(self, n: int, rng) -> TreeBatch:
        if self.spine_height < 1:
            raise ValueError("spine_height must be at least 1")
        return _grow(_GWKernel(self.pi, True), n, self.spine_height, self.radius,
                     self.pop_cap, rng, True, self.descendant_depth)


def sample_gwt(pi, pop_cap: int | None = None, depth_cap: int = 10, seed=None) -> FamilyTree:
    """One Galton-Watson tree; vertices at ``depth_cap`` or past ``pop_cap`` are boundary."""
    if depth_cap < 1 or (pop_cap is not None and pop_cap < 1):
        raise ValueError("caps must be at least 1")
    return _first(GWTSampler(OffspringDistribution.parse(pi), depth_cap, pop_cap)(1, as_generator(seed)))


def sample_egwt(pi, spine_height: int, depth_cap: int | None = None, pop_cap: int | None = None,
                seed=None) -> FamilyTree:
    """One Eternal Galton-Watson tree window rooted at ``o_0``."""
    s = EGWTSampler(OffspringDistribution.parse(pi), spine_height, depth_cap, pop_cap)
    return _first(s(1, as_generator(seed)))


class MultiTypeOffspring:
    """Multi-type offspring laws with a left eigenvector of the mean matrix.

    Parameters
    ----------
    types : sequence of int
        Type labels ``J``.
    laws : mapping
        ``laws[i]`` maps count vectors (aligned with ``types``) to
        probabilities for a parent of type ``i``.
    b, rho :
        Left eigenvector (summing to 1) and eigenvalue: ``b M = rho b``.
    """

    def __init__(self, types: Sequence[int], laws: Mapping[int, Mapping[tuple, float]],
                 b: Sequence[float], rho: float, tol: float = 1e-10):
        self.types = tuple(int(t) for t in types)
        K = len(self.types)
        self.laws = {int(i): {tuple(int(x) for x in k): float(p) for k, p in laws[i].items()}
                     for i in self.types}
        for i, law in self.laws.items():
            if any(len(k) != K for k in law):
                raise ValueError(f"count vectors of type {i} must have length {K}")
            if abs(sum(law.values()) - 1.0) > 1e-12:
                raise ValueError(f"law of type {i} does not sum to 1")
        M = np.zeros((K, K))
        for a, i in enumerate(self.types):
            for k, p in self.laws[i].items():
                M[a] += p * np.asarray(k, dtype=float)
        self.M = M
        self.b = np.asarray(b, dtype=float)
        self.rho = float(rho)
        if self.b.shape != (K,) or np.any(self.b < 0):
            raise ValueError("b must be a non-negative vector over the types")
        if abs(self.b.sum() - 1.0) > tol:
            raise ValueError("b must sum to 1")
        err = np.abs(self.b @ M - self.rho * self.b).max()
        if err > tol:
            raise ValueError(f"b is not a left eigenvector: |bM - rho b| = {err:.3g}")

    def transition(self) -> np.ndarray:
        """Spine chain ``P[i, j] = b_j m_{j,i} / (rho b_i)``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            P = (self.b[None, :] * self.M.T) / (self.rho * self.b[:, None])
        P[self.b == 0] = 0.0
        rows = P.sum(1, keepdims=True)
        return np.divide(P, rows, out=np.zeros_like(P), where=rows > 0)

    def biased(self, j: int, i: int) -> dict:
        """``pi_hat^{(j,i)}(k) = k_i pi^{(j)}(k) / m_{j,i}``."""
        a, c = self.types.index(j), self.types.index(i)
        m = self.M[a, c]
        if m <= 0:
            raise ValueError(f"m_({j},{i}) = 0")
        return {k: k[c] * p / m for k, p in self.laws[j].items() if k[c] > 0}


def canopy_params(d: int, d_tilde: float, tol: float = 1e-13) -> MultiTypeOffspring:
    """Layer types ``0..K-1``; type ``j > 0`` has ``d`` children of type ``j-1``.

    The infinite type set is truncated where ``d_tilde**-K`` drops below ``tol``.
    """
    K = max(2, int(math.ceil(math.log(tol) / math.log(1.0 / d_tilde))) + 1)
    laws = {}
    for j in range(K):
        k = [0] * K
        if j > 0:
            k[j - 1] = d
        laws[j] = {tuple(k): 1.0}
    b = d_tilde ** -np.arange(K, dtype=float)
    return MultiTypeOffspring(range(K), laws, b / b.sum(), d / d_tilde)


def isolated_end_params(d: int) -> MultiTypeOffspring:
    """Types ``{1, 2}``: type 1 has ``d`` type-1 and one type-2 child, type 2 one type-2 child."""
    return MultiTypeOffspring([1, 2], {1: {(d, 1): 1.0}, 2: {(0, 1): 1.0}},
                              [1 - 1 / d, 1 / d], float(d))


def comb_params(p: float, tol: float = 1e-13) -> MultiTypeOffspring:
    """Types ``1..K``; type ``j`` has one child of each type ``1..j``."""
    K = max(2, int(math.ceil(math.log(tol) / math.log(1 - p))) + 1)
    laws = {}
    for j in range(1, K + 1):
        laws[j] = {tuple(1 if t <= j else 0 for t in range(1, K + 1)): 1.0}
    b = p * (1 - p) ** np.arange(K, dtype=float)
    return MultiTypeOffspring(range(1, K + 1), laws, b / b.sum(), 1 / p)


class _MultiKernel:
    def __init__(self, params: MultiTypeOffspring):
        self.params = params
        K = len(params.types)
        tab = _SeqTable()
        pos = {t: a for a, t in enumerate(params.types)}

        def seq(k):
            return [a for a in range(K) for _ in range(k[a])]

        self.child_law = [tab.add_law((seq(k), p) for k, p in params.laws[t].items())
                          for t in params.types]
        self.spine_law = -np.ones((K, K), dtype=np.int64)
        for j in params.types:
            for i in params.types:
                if params.M[pos[j], pos[i]] > 0:
                    self.spine_law[pos[j], pos[i]] = tab.add_law(
                        (seq(k), p) for k, p in params.biased(j, i).items())
        self.tab = tab.freeze()
        self.P = params.transition()
        self._labels = np.array(params.types, dtype=np.int64)

    def labels(self, t):
        return self._labels[t]

    def _pick(self, cdf_rows, rng):
        u = rng.random(len(cdf_rows))
        return np.minimum((u[:, None] >= cdf_rows).sum(1), cdf_rows.shape[1] - 1)

    def root_types(self, B, rng):
        return self._pick(np.broadcast_to(np.cumsum(self.params.b), (B, len(self.params.b))), rng)

    def spine_types(self, B, H, rng):
        T = np.empty((B, H + 1), dtype=np.int64)
        T[:, 0] = self.root_types(B, rng)
        C = np.cumsum(self.P, axis=1)
        for i in range(1, H + 1):
            T[:, i] = self._pick(C[T[:, i - 1]], rng)
        return T

    def children(self, types, levels, trees, rng):
        ids = self.tab.draw_grouped(np.asarray(self.child_law)[types], rng)
        return self.tab.expand(ids)

    def spine_children(self, ptypes, ctypes, plevel, trees, rng):
        laws = self.spine_law[ptypes, ctypes]
        assert np.all(laws >= 0), "spine transition with m_{j,i} = 0"
        ids = self.tab.draw_grouped(laws, rng)
        cnt, flat = self.tab.expand(ids)
        owner = np.repeat(np.arange(len(ids)), cnt)
        c = ctypes[owner]
        below = np.bincount(owner, weights=flat < c, minlength=len(ids)).astype(np.int64)
        same = np.bincount(owner, weights=flat == c, minlength=len(ids)).astype(np.int64)
        pos = below + np.floor(rng.random(len(ids)) * same).astype(np.int64)
        return cnt, flat, pos


@dataclass(frozen=True)
class EMGWTSampler:
    params: MultiTypeOffspring
    spine_height: int
    depth_cap: int | None = None
    pop_cap: int | None = None

    @property
    def radius(self) -> int:
        return self.spine_height if self.depth_cap is None else min(self.spine_height, self.depth_cap)

    def __call__(self, n: int, rng) -> TreeBatch:
        return _grow(_MultiKernel(self.params), n, self.spine_height, self.radius,
                     self.pop_cap, rng, True)


def sample_emgwt(params: MultiTypeOffspring, spine_height: int, depth_cap: int | None = None,
                 pop_cap: int | None = None, seed=None) -> FamilyTree:
    """One Eternal Multi-Type Galton-Watson tree window; ``vtype`` holds the types."""
    return _first(EMGWTSampler(params, spine_height, depth_cap, pop_cap)(1, as_generator(seed)))


class _CanopyKernel:
    """The Canopy tree built directly: types are layer indices."""

    def __init__(self, d: int, d_tilde: float):
        self.d, self.d_tilde = d, d_tilde

    def labels(self, t):
        return t

    def spine_types(self, B, H, rng):
        first = rng.geometric(1.0 - 1.0 / self.d_tilde, B) - 1
        return first[:, None] + np.arange(H + 1)[None, :]

    def children(self, types, levels, trees, rng):
        cnt = np.where(types > 0, self.d, 0)
        return cnt, np.repeat(types - 1, cnt)

    def spine_children(self, ptypes, ctypes, plevel, trees, rng):
        cnt = np.full(len(ptypes), self.d, dtype=np.int64)
        pos = np.floor(rng.random(len(ptypes)) * self.d).astype(np.int64)
        return cnt, np.repeat(ptypes - 1, cnt), pos


@dataclass(frozen=True)
class CanopySampler:
    """Canopy tree with offspring cardinality ``d``, root layer ``P[I=i]`` proportional to ``d_tilde**-i``."""

    d: int
    d_tilde: float
    depth_cap: int

    def __call__(self, n: int, rng) -> TreeBatch:
        if self.d < 2 or self.d_tilde <= 1:
            raise ValueError("need d >= 2 and d_tilde > 1")
        return _grow(_CanopyKernel(self.d, self.d_tilde), n, self.depth_cap, self.depth_cap,
                     None, rng, True)


def sample_canopy(d: int, d_tilde: float, depth_cap: int, seed=None) -> FamilyTree:
    """One Canopy window of radius ``depth_cap``; ``vtype`` is the layer index."""
    return _first(CanopySampler(d, d_tilde, depth_cap)(1, as_generator(seed)))


def join_batch(components: TreeBatch, window: int) -> TreeBatch:
    """Join consecutive groups of ``2*window+1`` finite trees along their roots."""
    k = 2 * window + 1
    if len(components) % k:
        raise ValueError("number of components must be a multiple of 2*window+1")
    tops = components.roots
    parent = components.parent.copy()
    rank = components.rank.copy()
    boundary = components.boundary.copy()
    d1 = components.d1
    pos = np.arange(len(tops)) % k
    inner = np.flatnonzero(pos < k - 1)
    parent[tops[inner]] = tops[inner + 1]
    rank[tops[inner]] = d1[tops[inner + 1]]
    boundary[tops[pos == 0]] = True
    boundary[tops[pos == k - 1]] = True
    return TreeBatch(parent, components.tree_ptr[::k], tops[pos == window], rank=rank,
                     boundary=boundary, vtype=components.vtype, marks=components.marks)


@dataclass(frozen=True)
class JoinedSampler:
    """Joining of i.i.d. finite trees, optionally re-rooted at a typical vertex of ``T_0``.

    ``component(n, rng)`` must return finite trees rooted at their top.
    With ``stationary=True`` windows are drawn with probability proportional
    to ``|V(T_0)|`` (importance resampling from ``oversample * n`` joined
    windows) and the root moves to a uniform vertex of ``T_0``.
    """

    component: Callable
    window: int
    stationary: bool = False
    oversample: int = 10

    def __call__(self, n: int, rng) -> TreeBatch:
        k = 2 * self.window + 1
        M = n * self.oversample if self.stationary else n
        comps = self.component(M * k, rng)
        joined = join_batch(comps, self.window)
        if not self.stationary:
            return joined
        t0 = np.arange(M) * k + self.window
        sizes = comps.sizes[t0]
        pick = rng.choice(M, size=n, replace=True, p=sizes / sizes.sum())
        pick.sort()
        sub = joined.take(pick)
        j = np.floor(rng.random(n) * sizes[pick]).astype(np.int64)
        # T_0 occupies a contiguous block starting at the root (its top) in each window
        return sub.reroot(sub.roots + j)


def join_stationary(seq_sampler: Callable, window: int, seed=None) -> FamilyTree:
    """Join ``2*window+1`` trees ``T_{-w}..T_w`` drawn by ``seq_sampler(rng)``.

    ``seq_sampler`` returns a finite :class:`FamilyTree` rooted at its top.
    The result is rooted at ``o_0``; ``o_{-w}`` and ``o_w`` are boundary.
    """
    rng = as_generator(seed)
    trees = [seq_sampler(rng) for _ in range(2 * window + 1)]
    for t in trees:
        if t.root != t.top:
            raise ValueError("component trees must be rooted at their top")
    return join_batch(TreeBatch.from_trees(trees), window)[0]


def parse_param_file(path: str) -> dict:
    """``key = value`` lines; values are Python literals, ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            try:
                out[key] = ast.literal_eval(val)
            except (ValueError, SyntaxError):
                out[key] = val
    if "pi" in out:
        out["pi"] = OffspringDistribution.parse(out["pi"])
    return out
