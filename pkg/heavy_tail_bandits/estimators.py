"""
Robust aggregation primitives: clipping, medians, median of means and the smoothed
median of means used to build gradient estimates.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import RngStream
from .errors import PreconditionError


@dataclass(frozen=True)
class SmomConfig:
    """Smoothed median of means over 2m+1 blocks of n samples each."""
    m: int = 0
    n: int = 1
    theta: float = 0.0

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 0:
            raise PreconditionError(f"smom m must be a nonnegative integer, got {self.m!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise PreconditionError(f"smom n must be a positive integer, got {self.n!r}")
        if not self.theta >= 0:
            raise PreconditionError(f"smom theta must be nonnegative, got {self.theta}")

    @property
    def blocks(self) -> int:
        return 2 * self.m + 1

    @property
    def batch_size(self) -> int:
        return self.blocks * self.n


def clip(v: float, level: float) -> float:
    """Clip `v` to [-level, level], preserving its sign."""
    if level < 0:
        raise PreconditionError(f"clip level must be nonnegative, got {level}")
    if v > level:
        return level
    if v < -level:
        return -level
    return v


def median(values: Sequence[float]) -> float:
    """Exact median; an even count averages the two middle values."""
    ordered = sorted(values)
    count = len(ordered)
    if count == 0:
        raise PreconditionError("median of an empty sample")
    mid = count // 2
    if count % 2:
        return float(ordered[mid])
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def smom(samples: Sequence[float], cfg: SmomConfig, rng: Optional[RngStream] = None) -> float:
    """Smoothed median of means.

    Block j covers samples[j*n:(j+1)*n]; each block mean is perturbed by theta times a
    standard Gaussian from `rng` and the median of the 2m+1 perturbed means is returned.
    No Gaussian draws are consumed when theta is zero.
    """
    if len(samples) != cfg.batch_size:
        raise PreconditionError(
            f"smom expects (2m+1)*n = {cfg.batch_size} samples, got {len(samples)}"
        )
    n = cfg.n
    block_means = [sum(samples[j * n:(j + 1) * n]) / n for j in range(cfg.blocks)]
    if cfg.theta > 0:
        if rng is None:
            raise PreconditionError("smom with theta > 0 needs an rng for the smoothing noise")
        block_means = [v + cfg.theta * rng.normal() for v in block_means]
    return median(block_means)


def median_of_means(samples: Sequence[float], blocks: int) -> float:
    """Median of the means of `blocks` contiguous groups whose sizes differ by at most one."""
    if blocks < 1:
        raise PreconditionError(f"block count must be positive, got {blocks}")
    if blocks > len(samples):
        raise PreconditionError(f"cannot split {len(samples)} samples into {blocks} blocks")
    values = np.asarray(samples, dtype=float)
    if blocks == 1:
        return float(values.mean())
    # np.array_split sizes: the first len % blocks groups get one extra sample
    size, extra = divmod(len(values), blocks)
    cuts = np.arange(blocks) * size + np.minimum(np.arange(blocks), extra)
    sums = np.add.reduceat(values, cuts)
    counts = np.full(blocks, size, dtype=float)
    counts[:extra] += 1
    return float(np.median(sums / counts))
