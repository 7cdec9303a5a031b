"""
Invariant report
- per_instrument: one row per contract over its trading days (derivatives-style table)
- exchange: one row per group of instruments, each instrument reduced to its means
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import pandas as pd
from scipy import stats

from src.errors import ConfigurationError, EmptyReportError, StatisticalTestError
from src.estimators.models import EstimateSet

from .normality import DEFAULT_MC_REPLICATES, ks_normality, mean_equals_one_ttest, shapiro_wilk

logger = logging.getLogger(__name__)

LIQUID_T_PRICE_LIMIT = 15 * 60.0
DAY_VOLUME_FRACTION = 0.2

PER_INSTRUMENT_COLUMNS = ["symbol", "group", "n_days", "mean_t_price", "mean_gamma", "std_gamma",
                          "corr_t_price_t_volume", "sw_p", "ks_p", "t_test_p"]
EXCHANGE_COLUMNS = ["group", "total", "n_liquid", "mean_t_price", "mean_gamma", "std_gamma",
                    "corr_t_price_t_volume", "sw_p", "ks_p"]


def _floats(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64).ravel()


@dataclass(frozen=True)
class GammaSample:
    """γ values of one instrument (one per day), with the day's traded volume when known."""

    symbol: str
    values: np.ndarray
    group: str = ""
    traded_volume: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _floats(self.values))
        if self.traded_volume is not None:
            volume = _floats(self.traded_volume)
            if volume.shape != self.values.shape:
                raise ConfigurationError(f"{self.symbol}: traded_volume and gamma values differ in length")
            object.__setattr__(self, "traded_volume", volume)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(self.values.mean()) if self.n else math.nan

    @property
    def std(self) -> float:
        if self.n < 2:
            return 0.0 if self.n == 1 else math.nan
        return float(self.values.std(ddof=1))


@dataclass(frozen=True)
class CharacteristicTimes:
    """Paired T_Price/T_Volume observations of one instrument, aligned with its GammaSample."""

    symbol: str
    t_price: np.ndarray = field(default_factory=lambda: np.empty(0))
    t_volume: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        object.__setattr__(self, "t_price", _floats(self.t_price))
        object.__setattr__(self, "t_volume", _floats(self.t_volume))
        if self.t_price.shape != self.t_volume.shape:
            raise ConfigurationError(f"{self.symbol}: T_Price and T_Volume differ in length")


def samples_from_estimates(symbol: str, estimates: Sequence[EstimateSet],
                           group: str = "") -> tuple[GammaSample, CharacteristicTimes]:
    """Keep the days with a defined γ and pair them with their characteristic times."""
    kept = [e for e in estimates if e.gamma is not None]
    sample = GammaSample(
        symbol=symbol,
        values=[e.gamma for e in kept],
        group=group,
        traded_volume=[e.source_window.traded_volume for e in kept],
    )
    times = CharacteristicTimes(symbol, [e.t_price for e in kept], [e.t_volume for e in kept])
    return sample, times


def pearson_correlation(x, y) -> float:
    """Pearson r, NaN when either series is constant or shorter than two points."""
    x, y = _floats(x), _floats(y)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    return float(stats.pearsonr(x, y)[0])


def _p_or_nan(test, values: np.ndarray, **kwargs) -> float:
    try:
        return test(values, **kwargs).p_value
    except StatisticalTestError:
        return math.nan


def _volume_filter(sample: GammaSample, fraction: float) -> np.ndarray:
    if sample.traded_volume is None or sample.n == 0:
        return np.ones(sample.n, dtype=bool)
    return sample.traded_volume >= fraction * sample.traded_volume.max()


def _per_instrument(samples, times, volume_fraction, n_replicates, seed) -> pd.DataFrame:
    rows = []
    for sample, pair in zip(samples, times):
        keep = _volume_filter(sample, volume_fraction)
        values = sample.values[keep]
        if values.size == 0:
            logger.warning(f"[WARN] {sample.symbol}: every day removed by the volume filter")
            continue
        rows.append({
            "symbol": sample.symbol,
            "group": sample.group,
            "n_days": int(values.size),
            "mean_t_price": float(pair.t_price[keep].mean()),
            "mean_gamma": float(values.mean()),
            "std_gamma": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "corr_t_price_t_volume": pearson_correlation(pair.t_price[keep], pair.t_volume[keep]),
            "sw_p": _p_or_nan(shapiro_wilk, values),
            "ks_p": _p_or_nan(ks_normality, values, n_replicates=n_replicates, seed=seed),
            "t_test_p": _p_or_nan(mean_equals_one_ttest, values),
        })
    return pd.DataFrame(rows, columns=PER_INSTRUMENT_COLUMNS)


def _exchange(samples, times, t_price_limit, n_replicates, seed) -> pd.DataFrame:
    summary = pd.DataFrame({
        "group": [s.group for s in samples],
        "mean_gamma": [s.mean for s in samples],
        "mean_t_price": [float(np.mean(t.t_price)) if t.t_price.size else math.nan for t in times],
        "mean_t_volume": [float(np.mean(t.t_volume)) if t.t_volume.size else math.nan for t in times],
    })
    rows = []
    for group, members in summary.groupby("group", sort=True):
        liquid = members[(members["mean_t_price"] < t_price_limit) & members["mean_gamma"].notna()]
        if liquid.empty:
            logger.warning(f"[WARN] group '{group}': no instrument with T_Price < {t_price_limit:.0f}s")
            continue
        gammas = liquid["mean_gamma"].to_numpy()
        rows.append({
            "group": group,
            "total": int(len(members)),
            "n_liquid": int(len(liquid)),
            "mean_t_price": float(liquid["mean_t_price"].mean()),
            "mean_gamma": float(gammas.mean()),
            "std_gamma": float(gammas.std(ddof=1)) if gammas.size > 1 else 0.0,
            "corr_t_price_t_volume": pearson_correlation(liquid["mean_t_price"], liquid["mean_t_volume"]),
            "sw_p": _p_or_nan(shapiro_wilk, gammas),
            "ks_p": _p_or_nan(ks_normality, gammas, n_replicates=n_replicates, seed=seed),
        })
    return pd.DataFrame(rows, columns=EXCHANGE_COLUMNS)


def invariant_report(samples: Sequence[GammaSample], times: Sequence[CharacteristicTimes],
                     mode: Literal["per_instrument", "exchange"] = "per_instrument",
                     t_price_limit: float = LIQUID_T_PRICE_LIMIT,
                     volume_fraction: float = DAY_VOLUME_FRACTION,
                     n_replicates: int = DEFAULT_MC_REPLICATES,
                     seed: Optional[int] = 0) -> pd.DataFrame:
    """
    Summarize γ samples into the invariant test table.

    Args:
        samples: one GammaSample per instrument
        times: CharacteristicTimes aligned with ``samples``
        mode: "per_instrument" keeps days whose traded volume is at least
            ``volume_fraction`` of the instrument's busiest day; "exchange" keeps instruments
            whose mean T_Price is below ``t_price_limit`` seconds and reports the mean over
            instrument means per group
        n_replicates: Monte-Carlo replicates for the K-S p-value
        seed: seed of the K-S replicates

    Returns:
        DataFrame with PER_INSTRUMENT_COLUMNS or EXCHANGE_COLUMNS. Test p-values are NaN
        where the sample is too small or constant.
    """
    if not samples:
        raise EmptyReportError("No instruments to report on")
    if len(samples) != len(times):
        raise ConfigurationError("samples and times must be aligned per instrument")
    for sample, pair in zip(samples, times):
        if pair.t_price.size != sample.n:
            raise ConfigurationError(f"{sample.symbol}: {sample.n} gamma values but {pair.t_price.size} time pairs")

    if mode == "per_instrument":
        table = _per_instrument(samples, times, volume_fraction, n_replicates, seed)
    elif mode == "exchange":
        table = _exchange(samples, times, t_price_limit, n_replicates, seed)
    else:
        raise ConfigurationError(f"Unknown report mode {mode!r}")
    if table.empty:
        raise EmptyReportError(f"Every instrument was removed by the {mode} filters")
    logger.info(f"[OK] invariant report ({mode}): {len(table)} rows")
    return table
