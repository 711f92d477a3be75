"""Seeded Monte-Carlo plumbing.

Counter-based RNG streams (Philox) keyed by (base seed, stream index), and
a block-wise reduction that gives bit-identical results for any worker
count: blocks are fixed-size seed ranges, each block draws from its own
stream, and partial results are combined in block order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, stream)."""
    return np.random.Generator(np.random.Philox(key=np.array(
        [np.uint64(seed), np.uint64(stream)], dtype=np.uint64)))


@dataclass
class RunningMoments:
    """Associative accumulator for mean / variance / standard errors."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, values: np.ndarray):
        values = np.asarray(values, float)
        self.count += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.sum(values * values))

    def merge(self, other: "RunningMoments"):
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def variance(self) -> float:
        m = self.mean
        return max(self.total_sq / self.count - m * m, 0.0)

    @property
    def se_mean(self) -> float:
        return np.sqrt(self.variance / self.count)

    @property
    def se_variance(self) -> float:
        # normal-theory standard error of the sample variance
        return self.variance * np.sqrt(2.0 / max(self.count - 1, 1))


DEFAULT_BLOCK = 2048


def block_reduce(block_fn, n_total: int, seed: int, workers: int = 1,
                 block_size: int = DEFAULT_BLOCK):
    """Run block_fn(block_index, block_n, seed) over fixed seed blocks and
    return the list of per-block results in block order.

    The block layout depends only on n_total and block_size, never on
    workers, so reductions over the returned list are reproducible.
    """
    n_blocks = (n_total + block_size - 1) // block_size
    sizes = [min(block_size, n_total - b * block_size) for b in range(n_blocks)]
    if workers <= 1:
        return [block_fn(b, sizes[b], seed) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(block_fn, b, sizes[b], seed) for b in range(n_blocks)]
        return [f.result() for f in futures]
