"""Deterministic chunked Monte Carlo driver.

A run is fully determined by (seed, chunks, n): chunk i draws from a
generator spawned from the master seed's sequence, chunk statistics are
combined in chunk-index order, and worker scheduling cannot change the
result bit for bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


def default_workers() -> int:
    return int(os.environ.get("SECTINT_WORKERS", "1"))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    chunks: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "chunks": self.chunks,
        }

    @staticmethod
    def exact(value: float) -> "McEstimate":
        return McEstimate(float(value), 0.0, 1, 0, 1)


def chunk_sizes(n: int, chunks: int) -> list[int]:
    if n < 0 or chunks < 1:
        raise ValueError("need n >= 0 and chunks >= 1")
    base, rem = divmod(n, chunks)
    return [base + (1 if i < rem else 0) for i in range(chunks)]


def chunk_rngs(seed: int, chunks: int) -> list[np.random.Generator]:
    root = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in root.spawn(chunks)]


def _chunk_stats(values: np.ndarray) -> tuple[int, float, float]:
    count = int(values.size)
    if count == 0:
        return 0, 0.0, 0.0
    mean = float(np.mean(values))
    m2 = float(np.sum((values - mean) ** 2))
    return count, mean, m2


def _combine(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    n1, m1, s1 = a
    n2, m2, s2 = b
    if n1 == 0:
        return b
    if n2 == 0:
        return a
    n = n1 + n2
    delta = m2 - m1
    return n, m1 + delta * n2 / n, s1 + s2 + delta * delta * n1 * n2 / n


def mc_run(sample_fn, n: int, seed: int, chunks: int = 1, workers: int | None = None) -> McEstimate:
    """Estimate the mean of sample_fn(rng, size) over n draws.

    sample_fn must be a pure function of the generator state returning
    a (size,) array of per-sample values.
    """
    workers = workers or default_workers()
    sizes = chunk_sizes(n, chunks)
    rngs = chunk_rngs(seed, chunks)

    def one(i: int) -> tuple[int, float, float]:
        return _chunk_stats(np.asarray(sample_fn(rngs[i], sizes[i]), dtype=float))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(chunks)))
    else:
        parts = [one(i) for i in range(chunks)]

    total = (0, 0.0, 0.0)
    for p in parts:  # fixed order keeps the reduction bit-identical
        total = _combine(total, p)
    count, mean, m2 = total
    if count < 2:
        return McEstimate(mean, 0.0, max(count, 1), seed, chunks)
    stderr = float(np.sqrt(m2 / (count - 1) / count))
    return McEstimate(mean, stderr, count, seed, chunks)


# --- error propagation helpers ----------------------------------------------

def scaled(e: McEstimate, c: float) -> McEstimate:
    return McEstimate(c * e.mean, abs(c) * e.stderr, e.n_samples, e.seed, e.chunks)


def ratio(num: McEstimate, den: McEstimate) -> McEstimate:
    """First-order error propagation for num/den (independent estimates)."""
    if den.mean == 0:
        raise ZeroDivisionError("ratio of estimates with zero denominator")
    value = num.mean / den.mean
    rel = np.hypot(
        num.stderr / num.mean if num.mean != 0 else 0.0,
        den.stderr / den.mean,
    )
    return McEstimate(value, abs(value) * float(rel), num.n_samples, num.seed, num.chunks)


def product(a: McEstimate, b: McEstimate) -> McEstimate:
    value = a.mean * b.mean
    se = np.hypot(a.stderr * b.mean, b.stderr * a.mean)
    return McEstimate(value, float(se), a.n_samples, a.seed, a.chunks)


def agree(a: McEstimate, b: McEstimate, n_sigma: float = 3.0, atol: float = 1e-12) -> bool:
    """Whether two estimates agree within n_sigma combined standard errors."""
    tol = n_sigma * float(np.hypot(a.stderr, b.stderr)) + atol * max(abs(a.mean), abs(b.mean), 1.0)
    return abs(a.mean - b.mean) <= tol
