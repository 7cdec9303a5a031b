"""Per-window derived quantities."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import pandas as pd

from src.errors import DomainError
from src.estimators.formulas import (
    AnnualizationCalendar,
    annualize,
    correction_coefficient,
    gamma,
    instantaneous_volatility,
    spread_in_ticks,
    t_price,
    t_volume,
)
from src.marketdata.models import InstrumentSpec, WindowAggregate

logger = logging.getLogger(__name__)

ESTIMATE_COLUMNS = [
    "window_start", "window_end", "session_date", "valid", "spread_ticks", "correction",
    "t_price", "t_volume", "gamma", "sigma_inst", "sigma_inst_annualized",
]


@dataclass(frozen=True)
class EstimateSet:
    """
    T_Price, T_Volume, n, P(n), γ and σ_I for one window. Quantities that are undefined
    for the window (static price, no trades, empty book) are None.
    """

    t_price: Optional[float]
    t_volume: Optional[float]
    spread_ticks: float
    correction: float
    gamma: Optional[float]
    sigma_inst: Optional[float]
    sigma_inst_annualized: Optional[float]
    source_window: WindowAggregate

    def to_row(self) -> dict:
        w = self.source_window
        return {
            "window_start": w.window_start,
            "window_end": w.window_end,
            "session_date": w.session_date,
            "valid": w.valid,
            "spread_ticks": self.spread_ticks,
            "correction": self.correction,
            "t_price": self.t_price,
            "t_volume": self.t_volume,
            "gamma": self.gamma,
            "sigma_inst": self.sigma_inst,
            "sigma_inst_annualized": self.sigma_inst_annualized,
        }


def _maybe(fn, *args) -> Optional[float]:
    try:
        return fn(*args)
    except DomainError:
        return None


def estimate_window(agg: WindowAggregate, spec: InstrumentSpec,
                    calendar: Optional[AnnualizationCalendar] = None) -> EstimateSet:
    """Evaluate every estimator on one window, leaving undefined quantities empty."""
    calendar = calendar or AnnualizationCalendar.for_instrument(spec)
    n = spread_in_ticks(agg.avg_spread, spec.tick_size) if agg.avg_spread > 0 else 1.0
    sigma = _maybe(instantaneous_volatility, agg, spec)
    return EstimateSet(
        t_price=_maybe(t_price, agg),
        t_volume=_maybe(t_volume, agg, spec),
        spread_ticks=n,
        correction=correction_coefficient(n),
        gamma=_maybe(gamma, agg, spec),
        sigma_inst=sigma,
        sigma_inst_annualized=None if sigma is None else annualize(sigma, agg.duration, calendar),
        source_window=agg,
    )


def estimate_windows(aggregates: Sequence[WindowAggregate], spec: InstrumentSpec,
                     calendar: Optional[AnnualizationCalendar] = None) -> list[EstimateSet]:
    estimates = [estimate_window(a, spec, calendar) for a in aggregates]
    undefined = sum(1 for e in estimates if e.gamma is None)
    if undefined:
        logger.info(f"[OK] {spec.symbol}: gamma undefined on {undefined} of {len(estimates)} windows")
    return estimates


def estimates_frame(estimates: Sequence[EstimateSet]) -> pd.DataFrame:
    return pd.DataFrame([e.to_row() for e in estimates], columns=ESTIMATE_COLUMNS)


def mean_gamma(estimates: Sequence[EstimateSet]) -> float:
    values = [e.gamma for e in estimates if e.gamma is not None]
    return math.fsum(values) / len(values) if values else float("nan")
