"""Seeded, chunked execution with a fixed-order merge.

Every Monte Carlo routine splits its work into chunks of a fixed size and
gives each chunk its own child of a :class:`numpy.random.SeedSequence`.
Chunks may run in worker processes, but their results are always merged in
chunk order, so the output depends on the seed and the chunk size only,
never on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

DEFAULT_CHUNK = 20_000


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(seed.integers(0, 2**63 - 1, size=4).tolist())
    if seed is None:
        raise ValueError("a seed is required")
    return np.random.SeedSequence(seed)


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(as_seed_sequence(seed))


def chunk_sizes(total: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    if total < 0:
        raise ValueError("total must be non-negative")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def fresh(ss: np.random.SeedSequence) -> np.random.SeedSequence:
    """A copy of ``ss`` whose spawn counter starts from zero."""
    return np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key, pool_size=ss.pool_size)


def _call(args):
    fn, size, ss, extra = args
    rng = np.random.default_rng(ss)
    return fn(size, rng) if extra is None else fn(size, rng, extra)


def map_chunks(fn: Callable[..., Any], total: int, seed, chunk: int = DEFAULT_CHUNK,
               workers: int = 1, extras: Sequence | None = None) -> list:
    """Run ``fn(size, rng[, extra])`` over chunks of ``total``; results come back in chunk order.

    The chunk seeds are children of ``seed``; a ``SeedSequence`` argument is
    copied first, so calling twice with the same seed replays the same chunks.
    """
    sizes = chunk_sizes(total, chunk)
    base = fresh(seed) if isinstance(seed, np.random.SeedSequence) else as_seed_sequence(seed)
    seeds = base.spawn(len(sizes))
    extras = [None] * len(sizes) if extras is None else list(extras)
    jobs = list(zip([fn] * len(sizes), sizes, seeds, extras))
    if workers <= 1 or len(jobs) <= 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs))


@dataclass
class Moments:
    """Count, mean and centred sum of squares, mergeable in a fixed order."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, x) -> "Moments":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        return cls(int(x.size), mu, float(((x - mu) ** 2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return Moments(self.n, self.mean, self.m2)
        if self.n == 0:
            return Moments(other.n, other.mean, other.m2)
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def var(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self) -> float:
        return float(np.sqrt(self.var / self.n)) if self.n > 0 else float("inf")


def merge_all(parts: Sequence[Moments]) -> Moments:
    out = Moments()
    for p in parts:
        out = out.merge(p)
    return out
