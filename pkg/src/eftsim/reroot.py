"""The re-rooting operators sigma_n, pruning and geometric pruning.

``sigma_n`` biases a law of rooted Family Trees by ``d_n(o)`` and then moves
the root to a uniform vertex of ``D_n(o)``.  :func:`sigma_exact` applies it
to finitely supported laws with rational weights; :func:`sigma_mc` applies
it to a sampler by importance resampling.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .parallel import DEFAULT_CHUNK, as_generator, as_seed_sequence, fresh, map_chunks
from .tree_core import FamilyTree, TreeBatch, TruncationError, parse_code


class TreeMeasure:
    """Finitely supported probability law on rooted finite Family Trees.

    Keys are full canonical codes (unordered unless ``ordered=True``),
    values exact ``Fraction`` weights summing to one.
    """

    def __init__(self, weights: Mapping[bytes, Fraction], ordered: bool = False):
        w = {bytes(k): Fraction(v) for k, v in weights.items()}
        if any(v <= 0 for v in w.values()):
            raise ValueError("weights must be positive")
        if sum(w.values()) != 1:
            raise ValueError("weights must sum to exactly 1")
        self.weights = w
        self.ordered = ordered
        self._trees: dict[bytes, FamilyTree] = {}

    @classmethod
    def from_trees(cls, pairs: Iterable[tuple[FamilyTree, object]], ordered: bool = False,
                   normalize: bool = False) -> "TreeMeasure":
        acc: dict[bytes, Fraction] = {}
        for tree, w in pairs:
            code = tree.canonicalize(ordered=ordered)
            acc[code] = acc.get(code, Fraction(0)) + Fraction(w)
        acc = {k: v for k, v in acc.items() if v != 0}
        if normalize:
            total = sum(acc.values())
            acc = {k: v / total for k, v in acc.items()}
        return cls(acc, ordered)

    @classmethod
    def point_mass(cls, tree: FamilyTree, ordered: bool = False) -> "TreeMeasure":
        return cls.from_trees([(tree, 1)], ordered)

    def tree(self, code: bytes) -> FamilyTree:
        if code not in self._trees:
            self._trees[code] = parse_code(code)
        return self._trees[code]

    def items(self):
        for code, w in self.weights.items():
            yield self.tree(code), w

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeMeasure) and self.weights == other.weights

    def __repr__(self) -> str:
        return f"TreeMeasure({len(self)} trees)"

    def expectation(self, fn: Callable[[FamilyTree], object]) -> Fraction:
        return sum((w * Fraction(fn(t)) for t, w in self.items()), Fraction(0))

    def law(self, stat: Callable[[FamilyTree], object]) -> dict:
        out: dict = {}
        for t, w in self.items():
            k = stat(t)
            out[k] = out.get(k, Fraction(0)) + w
        return out

    def ball_law(self, radius: int) -> dict:
        """Law of the radius-``radius`` ball code around the root."""
        return self.law(lambda t: t.canonicalize(radius, self.ordered))

    def to_lines(self) -> str:
        rows = sorted(self.weights.items())
        return "".join(f"{w.numerator} {w.denominator} {c.decode()}\n" for c, w in rows)

    @classmethod
    def from_lines(cls, text: str, ordered: bool = False) -> "TreeMeasure":
        w = {}
        for line in text.splitlines():
            if line.strip():
                a, b, code = line.split()
                w[code.encode()] = Fraction(int(a), int(b))
        return cls(w, ordered)


def enumerate_rooted_trees(max_vertices: int, ordered: bool = False,
                           min_vertices: int = 1) -> list[bytes]:
    """Codes of all rooted finite Family Trees with ``min..max`` vertices.

    A rooted FT is a finite tree with its top plus a choice of root, so the
    same shape contributes one code per root orbit.
    """
    seen = set()
    for n in range(min_vertices, max_vertices + 1):
        for tail in itertools.product(*[range(i) for i in range(1, n)]):
            tree = FamilyTree(np.array((-1,) + tail, dtype=np.int64), 0)
            for v in range(n):
                seen.add(tree.canonicalize(ordered=ordered, at=v))
    return sorted(seen, key=lambda c: (len(c), c))


def sigma_exact(mu: TreeMeasure, n: int, budget: int = 8) -> TreeMeasure:
    """Exact ``sigma_n mu``: weight of ``[T, v]`` proportional to ``mu[T, o]`` for ``v`` in ``D_n(o)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    acc: dict[bytes, Fraction] = {}
    total = Fraction(0)
    for tree, w in mu.items():
        if tree.n > budget:
            raise ValueError(f"tree with {tree.n} vertices exceeds the exact budget {budget}")
        for v in tree.descendants_n(tree.root, n).vertices.tolist():
            code = tree.canonicalize(ordered=mu.ordered, at=v)
            acc[code] = acc.get(code, Fraction(0)) + w
            total += w
    if total == 0:
        raise ValueError(f"no vertex of the support has descendants of order {n}")
    return TreeMeasure({k: v / total for k, v in acc.items()}, mu.ordered)


def _weights_job(sampler, n):
    def job(size, rng):
        batch = sampler(size, rng)
        counts, complete = batch.descendant_counts(n)
        if not complete.all():
            raise TruncationError(f"d_{n}(o) is not fully inside some sampled window")
        return counts
    return job


def _pick_job(sampler, n):
    def job(size, rng, picks):
        local, offset = picks
        if len(local) == 0:
            return None
        batch = sampler(size, rng).take(local)
        verts, owner, _ = batch.descendants(n)
        starts = np.r_[0, np.cumsum(np.bincount(owner, minlength=len(local)))[:-1]]
        return batch.reroot(verts[starts + offset])
    return job


@dataclass
class _Job:
    sampler: Callable
    n: int
    mode: str

    def __call__(self, size, rng, extra=None):
        if self.mode == "weights":
            return _weights_job(self.sampler, self.n)(size, rng)
        return _pick_job(self.sampler, self.n)(size, rng, extra)


def sigma_mc(sampler: Callable, n: int, N: int, seed, oversample: int = 10,
             chunk: int = DEFAULT_CHUNK, workers: int = 1) -> TreeBatch:
    """Draw ``N`` windows from ``sigma_n`` of the law of ``sampler``.

    ``M = oversample * N`` windows are drawn in seeded chunks, ``N`` of them
    are resampled with weights ``d_n(o)``, the chunks holding them are
    regenerated from the same seeds, and each picked window is re-rooted at
    a uniform vertex of ``D_n(o)``.  The output is independent of
    ``workers``.
    """
    if n < 0 or N <= 0:
        raise ValueError("need n >= 0 and N > 0")
    M = oversample * N
    draw_ss, pick_ss = as_seed_sequence(seed).spawn(2)
    w = np.concatenate(map_chunks(_Job(sampler, n, "weights"), M, fresh(draw_ss), chunk, workers))
    total = w.sum()
    if total == 0:
        raise ValueError(f"every drawn tree has d_{n}(o) = 0")
    ess = total ** 2 / np.sum(w.astype(float) ** 2)
    if ess < N / 2:
        warnings.warn(f"effective sample size {ess:.0f} is below N/2 = {N / 2:.0f}", RuntimeWarning)
    rng = np.random.default_rng(pick_ss)
    chosen = np.sort(rng.choice(M, size=N, replace=True, p=w / total))
    offset = np.floor(rng.random(N) * w[chosen]).astype(np.int64)
    bounds = np.arange(0, M + chunk, chunk)
    extras = []
    for c in range(len(bounds) - 1):
        lo, hi = np.searchsorted(chosen, [bounds[c], bounds[c + 1]])
        extras.append((chosen[lo:hi] - bounds[c], offset[lo:hi]))
    parts = map_chunks(_Job(sampler, n, "pick"), M, fresh(draw_ss), chunk, workers, extras)
    out = TreeBatch.concatenate([p for p in parts if p is not None])
    return out.take(rng.permutation(N))


def prune(tree: FamilyTree, z: int) -> FamilyTree:
    """Restriction to vertices at most ``z`` generations younger than the root, rooted at the root.

    Ancestors and their other descendants are kept; only generations below
    ``level(o) + z`` are removed.  Vertices of the last kept generation lose
    their boundary flag because their (now empty) child set is exact.
    """
    if z < 0:
        raise ValueError("z must be non-negative")
    keep = tree.level <= z
    boundary = tree.boundary & ~((tree.level == z) & (tree.parent >= 0))
    return tree.with_boundary(boundary).restrict(keep)


def prune_batch(batch: TreeBatch, z) -> TreeBatch:
    z = np.broadcast_to(np.asarray(z, dtype=np.int64), (len(batch),))
    if np.any(z < 0):
        raise ValueError("z must be non-negative")
    rel = batch.level - batch.level[batch.roots][batch.tree_of]
    zz = z[batch.tree_of]
    keep = rel <= zz
    bd = batch.boundary & ~((rel == zz) & (batch.parent >= 0))
    src = TreeBatch(batch.parent, batch.tree_ptr, batch.roots, rank=batch.rank, boundary=bd,
                    vtype=batch.vtype, marks=batch.marks, level=batch.level)
    return src.restrict(keep)


@dataclass(frozen=True)
class GeometricPruneSampler:
    """Prune each window from generation ``Z`` with ``Z + 1 ~ Geometric(1 - 1/m)``."""

    base: Callable
    m: float

    def __post_init__(self):
        if not self.m > 1:
            raise ValueError(f"geometric pruning needs m > 1, got {self.m}")

    def __call__(self, n: int, rng) -> TreeBatch:
        batch = self.base(n, rng)
        z = rng.geometric(1.0 - 1.0 / self.m, n) - 1
        return prune_batch(batch, z)


def prune_geometric(eft_sampler: Callable, m: float | None = None, seed=None,
                    pilot: int = 20_000) -> GeometricPruneSampler:
    """Wrap an offspring-invariant EFT sampler with independent geometric pruning.

    When ``m`` is not given it is estimated as the mean of ``d_1(o)`` over a
    pilot batch drawn with ``seed``.
    """
    if m is None:
        batch = eft_sampler(pilot, as_generator(seed))
        counts, complete = batch.descendant_counts(1)
        if not complete.all():
            raise TruncationError("d_1(o) is not inside the window")
        m = float(counts.mean())
    return GeometricPruneSampler(eft_sampler, float(m))
