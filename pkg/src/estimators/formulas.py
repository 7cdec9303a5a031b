"""
Characteristic times, the market invariant and the instantaneous volatility.

All functions are pure. Times are seconds, volumes are shares/contracts, σ_I is a
fractional return per window; annualization is a separate explicit step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from src.errors import ConfigurationError, DomainError, UndefinedGammaError, UndefinedTimeError, UndefinedVolatilityError
from src.marketdata.models import InstrumentSpec, WindowAggregate

ArrayLike = Union[float, np.ndarray]

TRADING_SESSIONS_PER_YEAR = 252
DEFAULT_SESSION_SECONDS = 8.5 * 3600


@dataclass(frozen=True)
class AnnualizationCalendar:
    sessions_per_year: float = TRADING_SESSIONS_PER_YEAR
    session_seconds: float = DEFAULT_SESSION_SECONDS

    def __post_init__(self):
        if not (self.sessions_per_year > 0 and self.session_seconds > 0):
            raise ConfigurationError("Annualization calendar values must be positive")

    @classmethod
    def for_instrument(cls, spec: InstrumentSpec, sessions_per_year: float = TRADING_SESSIONS_PER_YEAR):
        return cls(sessions_per_year=sessions_per_year, session_seconds=spec.session_seconds)


def scale_sigma(sigma_dt: float, dt: float, t: float) -> float:
    """Square-root time scaling of a random-walk standard deviation from ΔT to t."""
    if not dt > 0:
        raise DomainError(f"dT must be positive, got {dt}")
    if sigma_dt < 0 or t < 0:
        raise DomainError(f"sigma and t must be non-negative, got sigma={sigma_dt}, t={t}")
    return sigma_dt * math.sqrt(t / dt)


def spread_in_ticks(avg_spread: float, tick_size: float, clamp: bool = True) -> float:
    """n = ⟨spread⟩ / TS, clamped to 1 from below unless ``clamp`` is False."""
    n = avg_spread / tick_size
    if clamp:
        return max(n, 1.0)
    return n


def correction_coefficient(spread_ticks: ArrayLike) -> ArrayLike:
    """
    Share of traded volume that trades at the touch or below: ½(1 + exp(-(n-1)/√n)).

    Accepts a scalar or an array of n >= 1. Strictly decreasing from P(1) = 1 towards ½.
    """
    n = np.asarray(spread_ticks, dtype=np.float64)
    if np.any(~(n >= 1.0)):
        raise DomainError(f"Spread in ticks must be >= 1, got {spread_ticks}")
    p = 0.5 * (1.0 + np.exp(-(n - 1.0) / np.sqrt(n)))
    if p.ndim == 0:
        return float(p)
    return p


def correction_curve(grid: np.ndarray) -> np.ndarray:
    """P(n) sampled on ``grid`` for overlay plots."""
    return np.asarray(correction_coefficient(np.asarray(grid, dtype=np.float64)))


def _require_valid(agg: WindowAggregate, what: str) -> None:
    if not agg.valid:
        raise DomainError(f"{what} requires a valid window "
                          f"(n_quotes={agg.n_quotes}, n_trades={agg.n_trades}, spread={agg.avg_spread})")


def t_price(agg: WindowAggregate) -> float:
    """T_Price = ΔT (⟨spread⟩ / σ(ΔT))²."""
    _require_valid(agg, "T_Price")
    if not agg.price_std > 0:
        raise UndefinedTimeError("T_Price is undefined for a static price (σ(ΔT) = 0)")
    return agg.duration * (agg.avg_spread / agg.price_std) ** 2


def uncorrected_t_volume(agg: WindowAggregate) -> float:
    """T_Volume before the spread correction: ΔT (⟨V_BID⟩ + ⟨V_ASK⟩) / V_Traded."""
    _require_valid(agg, "T_Volume")
    if not agg.traded_volume > 0:
        raise UndefinedTimeError("T_Volume is undefined without traded volume")
    return agg.duration * agg.book_volume / agg.traded_volume


def t_volume(agg: WindowAggregate, spec: InstrumentSpec) -> float:
    """T_Volume corrected by 1/P(n); equals the uncorrected time when n = 1."""
    base = uncorrected_t_volume(agg)
    n = spread_in_ticks(agg.avg_spread, spec.tick_size)
    if n == 1.0:
        return base
    return base / correction_coefficient(n)


def one_sided_volume(t: float, agg: WindowAggregate) -> float:
    """Volume traded on one side of the market during t at the window's trading rate."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    _require_valid(agg, "one-sided volume")
    return (t / 2.0) * agg.traded_volume / agg.duration


def gamma(agg: WindowAggregate, spec: InstrumentSpec) -> float:
    """
    Market invariant γ = (σ/⟨spread⟩) · sqrt((⟨V_BID⟩+⟨V_ASK⟩)/V_Traded) · sqrt(1/P(n)).

    γ² equals T_Volume / T_Price.
    """
    try:
        _require_valid(agg, "gamma")
    except DomainError as e:
        raise UndefinedGammaError(str(e)) from e
    if not agg.price_std > 0:
        raise UndefinedGammaError("gamma is undefined: T_Price undefined (σ(ΔT) = 0)")
    if not agg.traded_volume > 0:
        raise UndefinedGammaError("gamma is undefined: T_Volume undefined (no traded volume)")
    n = spread_in_ticks(agg.avg_spread, spec.tick_size)
    return ((agg.price_std / agg.avg_spread)
            * math.sqrt(agg.book_volume / agg.traded_volume)
            * math.sqrt(1.0 / correction_coefficient(n)))


def instantaneous_volatility(agg: WindowAggregate, spec: InstrumentSpec) -> float:
    """
    σ_I(ΔT) = (⟨spread⟩/⟨Price⟩) · sqrt(V_Traded/(⟨V_BID⟩+⟨V_ASK⟩)) · sqrt(P(n)).

    Zero when nothing traded, undefined when no book prevails in the window. The
    depth-averaged ("truly instantaneous") variant is selected upstream through
    AggregationConfig (book_levels, price_source).
    """
    _require_valid_for_sigma(agg)
    if agg.book_volume <= 0:
        raise UndefinedVolatilityError("Instantaneous volatility is undefined for an empty book")
    if agg.traded_volume == 0:
        return 0.0
    n = spread_in_ticks(agg.avg_spread, spec.tick_size)
    return ((agg.avg_spread / agg.avg_price)
            * math.sqrt(agg.traded_volume / agg.book_volume)
            * math.sqrt(correction_coefficient(n)))


def _require_valid_for_sigma(agg: WindowAggregate) -> None:
    # A window without trades keeps a static price: σ_I = 0 whenever a book prevails,
    # with or without quote updates inside the window. No prevailing book, no σ_I.
    if agg.valid:
        return
    if agg.n_trades == 0 and agg.avg_spread > 0 and math.isfinite(agg.avg_price):
        return
    raise DomainError(f"Instantaneous volatility requires a prevailing book "
                      f"(n_quotes={agg.n_quotes}, n_trades={agg.n_trades}, spread={agg.avg_spread})")


def annualize(sigma_window: float, dt: float, calendar: AnnualizationCalendar | None = None) -> float:
    """σ_window · sqrt(sessions_per_year · session_seconds / ΔT)."""
    if not dt > 0:
        raise DomainError(f"dT must be positive, got {dt}")
    calendar = calendar or AnnualizationCalendar()
    return sigma_window * math.sqrt(calendar.sessions_per_year * calendar.session_seconds / dt)


def passive_fill_probability() -> float:
    """Probability of a passive fill at the touch after waiting T_Price: 1 - erf(1/√2) ≈ 0.3173."""
    return float(special.erfc(1.0 / math.sqrt(2.0)))
