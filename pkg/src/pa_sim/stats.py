"""Random streams and summary statistics for the Monte Carlo harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.959963984540054

# Trials are generated in fixed-size blocks; block b owns trial indices
# [b * TRIAL_BLOCK, (b + 1) * TRIAL_BLOCK).  The block layout never depends on
# the worker count, which is what makes runs reproducible across pools.
TRIAL_BLOCK = 2000


def derive_stream(master_seed: int, trial_index: int, *labels: int) -> np.random.Generator:
    """Counter-based Philox stream keyed on (master_seed, labels..., trial_index)."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), *map(int, labels), int(trial_index)])
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def trial_blocks(trials: int, block: int = TRIAL_BLOCK):
    """Yield ``(block_index, n_in_block)`` covering ``trials`` trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for b in range(math.ceil(trials / block)):
        yield b, min(block, trials - b * block)


@dataclass(frozen=True)
class SummaryStat:
    mean: float
    half_width: float
    count: int

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def separated_above(self, other: "SummaryStat") -> bool:
        """True when this interval lies strictly above ``other``."""
        return self.low > other.high


def mean_ci(samples) -> SummaryStat:
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    hw = Z95 * x.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    return SummaryStat(float(x.mean()), float(hw), n)


def ratio_of_means(numerator, denominator) -> SummaryStat:
    """sum(num) / sum(den) with a delta-method normal 95% interval."""
    y = np.asarray(numerator, dtype=float)
    d = np.asarray(denominator, dtype=float)
    n = y.size
    if n == 0 or d.size != n:
        raise ValueError("numerator and denominator must be non-empty and aligned")
    if np.isinf(d).all():
        return SummaryStat(0.0, 0.0, n)
    ratio = y.sum() / d.sum()
    if n == 1:
        return SummaryStat(float(ratio), math.inf, n)
    resid = y - ratio * d
    hw = Z95 * resid.std(ddof=1) / (math.sqrt(n) * d.mean())
    return SummaryStat(float(ratio), float(hw), n)


# Quantile levels 0.01, 0.02, ..., 0.99 as integer percent.
CDF_PERCENTS = tuple(range(1, 100))


def empirical_cdf(samples, percents=CDF_PERCENTS) -> dict[float, float]:
    """Quantile q -> ceil(q n)-th order statistic (1-based)."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    out = {}
    for p in percents:
        k = max(1, -(-p * n // 100))
        out[p / 100] = float(x[k - 1])
    return out


def median_ci(samples) -> tuple[float, float, float]:
    """Sample median with a distribution-free 95% order-statistic interval."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    half = Z95 * math.sqrt(n) / 2.0
    lo = max(0, int(math.floor(n / 2 - half)))
    hi = min(n - 1, int(math.ceil(n / 2 + half)))
    return float(np.median(x)), float(x[lo]), float(x[hi])
