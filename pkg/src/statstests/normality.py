"""Normality tests and the one-sample mean test used on γ samples."""

import logging
from dataclasses import asdict, dataclass
from typing import Literal, Optional

import numpy as np
from scipy import stats

from src.errors import StatisticalTestError

logger = logging.getLogger(__name__)

ALPHA = 0.05
SHAPIRO_MAX_N = 5000
DEFAULT_MC_REPLICATES = 2000
# Replicates are drawn in blocks to bound memory on long samples
_MC_BLOCK_CELLS = 2_000_000

Method = Literal["shapiro_wilk", "kolmogorov_smirnov", "lilliefors_mc", "t_test_mean_one"]


@dataclass(frozen=True)
class TestReport:
    statistic: float
    p_value: float
    method: Method
    reject_at_005: bool
    n: int = 0

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)


def _as_sample(sample, min_n: int = 3) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size < min_n:
        raise StatisticalTestError(f"Test needs at least {min_n} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise StatisticalTestError("Sample contains non-finite values")
    if np.ptp(x) == 0:
        raise StatisticalTestError("Sample has zero variance")
    return x


def _report(statistic: float, p_value: float, method: Method, n: int) -> TestReport:
    p_value = float(min(max(p_value, 0.0), 1.0))
    return TestReport(float(statistic), p_value, method, bool(p_value < ALPHA), n)


def shapiro_wilk(sample) -> TestReport:
    """Shapiro-Wilk W and its p-value for 3 <= n <= 5000."""
    x = _as_sample(sample)
    if x.size > SHAPIRO_MAX_N:
        raise StatisticalTestError(f"Shapiro-Wilk supports at most {SHAPIRO_MAX_N} observations, got {x.size}")
    result = stats.shapiro(x)
    return _report(result.statistic, result.pvalue, "shapiro_wilk", x.size)


def _ks_distance_normal(sorted_z: np.ndarray) -> np.ndarray:
    """Two-sided KS distance to N(0, 1) for each row of ``sorted_z``."""
    n = sorted_z.shape[-1]
    cdf = stats.norm.cdf(sorted_z)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return np.maximum(upper.max(axis=-1), lower.max(axis=-1))


def _standardize(x: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    std = x.std(axis=-1, ddof=1, keepdims=True)
    return (x - mean) / std


def ks_normality(sample, mode: Literal["fixed_params", "estimated_params_mc"] = "estimated_params_mc",
                 loc: float = 0.0, scale: float = 1.0,
                 n_replicates: int = DEFAULT_MC_REPLICATES, seed: Optional[int] = 0) -> TestReport:
    """
    One-sample Kolmogorov-Smirnov test against a normal distribution.

    Args:
        sample: observations
        mode: "fixed_params" tests against N(loc, scale²) with the classical p-value;
            "estimated_params_mc" fits mean/std to the sample and calibrates D against
            ``n_replicates`` simulated normal samples refitted the same way
        loc: mean for fixed_params
        scale: standard deviation for fixed_params
        n_replicates: Monte-Carlo null replicates
        seed: master seed for the replicates

    Returns:
        TestReport with method "kolmogorov_smirnov" or "lilliefors_mc"
    """
    x = _as_sample(sample)
    if mode == "fixed_params":
        if not scale > 0:
            raise StatisticalTestError(f"scale must be positive, got {scale}")
        result = stats.kstest(x, "norm", args=(loc, scale))
        return _report(result.statistic, result.pvalue, "kolmogorov_smirnov", x.size)
    if mode != "estimated_params_mc":
        raise StatisticalTestError(f"Unknown K-S mode {mode!r}")
    if n_replicates < 1:
        raise StatisticalTestError(f"n_replicates must be >= 1, got {n_replicates}")

    d_obs = float(_ks_distance_normal(np.sort(_standardize(x))))
    n = x.size
    block = max(1, _MC_BLOCK_CELLS // n)
    children = np.random.SeedSequence(seed).spawn((n_replicates + block - 1) // block)
    exceed, done = 0, 0
    for child in children:
        size = min(block, n_replicates - done)
        null = np.random.default_rng(child).standard_normal((size, n))
        d_null = _ks_distance_normal(np.sort(_standardize(null), axis=1))
        exceed += int(np.count_nonzero(d_null >= d_obs))
        done += size
    p_value = (1 + exceed) / (1 + n_replicates)
    return _report(d_obs, p_value, "lilliefors_mc", n)


def mean_equals_one_ttest(sample) -> TestReport:
    """
    Two-sided one-sample t-test of ⟨γ⟩ = 1.

    Used as the check of the strong null hypothesis on the mean invariant, which has no
    standard named test of its own.
    """
    x = _as_sample(sample, min_n=2)
    result = stats.ttest_1samp(x, popmean=1.0)
    return _report(result.statistic, result.pvalue, "t_test_mean_one", x.size)
