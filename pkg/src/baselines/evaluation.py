"""
Forecast evaluation
- Mean squared error between realized and candidate volatilities
- Normalized returns ξ = r / σ_I over a history/forecast grid
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import DomainError, InsufficientHistoryError, LengthMismatchError
from src.estimators.formulas import instantaneous_volatility
from src.marketdata.aggregate import group_by_session, merge_windows
from src.marketdata.models import InstrumentSpec, WindowAggregate

logger = logging.getLogger(__name__)

GRID_MINUTES = (1, 5, 10, 30, 60)
XI_GRID_COLUMNS = ["history_min", "forecast_min", "sigma_xi", "n_obs", "n_skipped"]


def mse_compare(realized, candidate, exclusions: Iterable[int] = ()) -> float:
    """
    (1/N) Σ (σ_R,i − σ̂_i)² over the positions not listed in ``exclusions``.

    Raises:
        LengthMismatchError: the two series differ in length
        InsufficientHistoryError: every position is excluded
    """
    a = np.asarray(realized, dtype=np.float64)
    b = np.asarray(candidate, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatchError(f"Series lengths differ: {a.size} vs {b.size}")
    keep = np.ones(a.size, dtype=bool)
    excluded = np.asarray(sorted(set(exclusions)), dtype=np.int64)
    if excluded.size:
        if excluded[0] < 0 or excluded[-1] >= a.size:
            raise DomainError(f"Exclusion index out of range for {a.size} days")
        keep[excluded] = False
    if not keep.any():
        raise InsufficientHistoryError("Every day is excluded from the MSE")
    return float(np.mean((a[keep] - b[keep]) ** 2))


@dataclass(frozen=True)
class XiCell:
    """ξ sample of one history/forecast pair."""

    history_min: float
    forecast_min: float
    xi: np.ndarray
    n_skipped: int

    @property
    def n_obs(self) -> int:
        return int(self.xi.size)

    @property
    def sigma_xi(self) -> float:
        if self.xi.size < 2:
            return math.nan
        return float(np.std(self.xi, ddof=1))

    def to_row(self) -> dict:
        return {"history_min": self.history_min, "forecast_min": self.forecast_min,
                "sigma_xi": self.sigma_xi, "n_obs": self.n_obs, "n_skipped": self.n_skipped}


@dataclass(frozen=True)
class ForecastEval:
    mse_inst: float
    mse_garch: float
    n_days: int
    xi: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def sigma_xi(self) -> float:
        return float(np.std(self.xi, ddof=1)) if self.xi.size > 1 else math.nan

    def to_dict(self) -> dict:
        return {"mse_inst": self.mse_inst, "mse_garch": self.mse_garch, "n_days": self.n_days,
                "sigma_xi": self.sigma_xi, "n_xi": int(self.xi.size)}


def xi_evaluation(returns, sigma_inst, history: float, forecast: float) -> XiCell:
    """
    ξ_i = r_i / (σ_{i-1,I} · sqrt(forecast/history)).

    ``sigma_inst[i]`` is σ_I measured over the history interval just before the interval
    of ``returns[i]``. Observations with a zero or missing σ_I (or a missing return) are
    skipped and counted, never filled in.
    """
    r = np.asarray(returns, dtype=np.float64)
    s = np.asarray(sigma_inst, dtype=np.float64)
    if r.shape != s.shape:
        raise LengthMismatchError(f"returns and sigma_inst differ in length: {r.size} vs {s.size}")
    if not (history > 0 and forecast > 0):
        raise DomainError(f"history and forecast must be positive, got {history}, {forecast}")
    usable = np.isfinite(r) & np.isfinite(s) & (s > 0)
    skipped = int(r.size - np.count_nonzero(usable))
    if skipped:
        logger.warning(f"[WARN] xi({history:g},{forecast:g}): skipped {skipped} of {r.size} observations")
    xi = r[usable] / (s[usable] * math.sqrt(forecast / history))
    return XiCell(history, forecast, xi, skipped)


def _sigma_or_nan(windows: Sequence[WindowAggregate], spec: InstrumentSpec) -> float:
    try:
        return instantaneous_volatility(merge_windows(windows), spec)
    except DomainError:
        return math.nan


def _edge_return(windows: Sequence[WindowAggregate]) -> float:
    p0, p1 = windows[0].open_price, windows[-1].close_price
    if not (np.isfinite(p0) and np.isfinite(p1) and p0 > 0 and p1 > 0):
        return math.nan
    return float(math.log(p1 / p0))


def xi_pairs(aggregates_1min: Sequence[WindowAggregate], spec: InstrumentSpec,
             history_min: int, forecast_min: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Forecast-interval returns paired with the σ_I of the preceding history interval.

    Forecast intervals are consecutive, non-overlapping and start at multiples of
    ``forecast_min`` minutes once ``history_min`` minutes of the session have elapsed.
    """
    returns, sigmas = [], []
    for windows in group_by_session(aggregates_1min).values():
        start = history_min
        # align the first forecast interval to the forecast grid
        start += (-start) % forecast_min
        while start + forecast_min <= len(windows):
            sigmas.append(_sigma_or_nan(windows[start - history_min:start], spec))
            returns.append(_edge_return(windows[start:start + forecast_min]))
            start += forecast_min
    return np.array(returns), np.array(sigmas)


def xi_grid(aggregates_1min: Sequence[WindowAggregate], spec: InstrumentSpec,
            histories: Sequence[int] = GRID_MINUTES,
            forecasts: Sequence[int] = GRID_MINUTES) -> tuple[pd.DataFrame, dict[tuple[int, int], XiCell]]:
    """
    σ(ξ) for every history <= forecast pair, built from one-minute aggregates.

    Returns:
        (table with XI_GRID_COLUMNS, cells keyed by (history_min, forecast_min))
    """
    if not aggregates_1min:
        raise InsufficientHistoryError("No one-minute windows for the xi grid")
    cells: dict[tuple[int, int], XiCell] = {}
    for f in forecasts:
        for h in histories:
            if h > f:
                continue
            returns, sigmas = xi_pairs(aggregates_1min, spec, h, f)
            cells[(h, f)] = xi_evaluation(returns, sigmas, float(h), float(f))
    table = pd.DataFrame([c.to_row() for c in cells.values()], columns=XI_GRID_COLUMNS)
    return table, cells


def xi_histogram(xi, bins: int = 50, limit: Optional[float] = None) -> pd.DataFrame:
    """Histogram data of ξ with a density column; ``limit`` clips the range to ±limit."""
    values = np.asarray(xi, dtype=np.float64)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise InsufficientHistoryError("No xi observations to histogram")
    value_range = (-limit, limit) if limit else None
    counts, edges = np.histogram(values, bins=bins, range=value_range)
    widths = np.diff(edges)
    density = counts / (values.size * widths)
    return pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:], "count": counts, "density": density})
