"""Realized volatility from window edge prices or sampled mids, and daily close-to-close returns."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd

from src.errors import DomainError, InsufficientHistoryError
from src.marketdata.aggregate import NS_PER_DAY, group_by_session, session_days, window_edges
from src.marketdata.models import NS_PER_SECOND, InstrumentSpec, QuoteStream, TradeStream, WindowAggregate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReturnSeries:
    """
    Intraday log returns r_t = ln(P(t+ΔT)/P(t)) with overnight gaps excised.

    ``day_boundaries[k]`` is the index of the first return of session ``session_dates[k]``.
    """

    interval: float
    returns: np.ndarray
    day_boundaries: np.ndarray
    session_dates: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=np.float64))
        object.__setattr__(self, "day_boundaries", np.asarray(self.day_boundaries, dtype=np.int64))
        if self.day_boundaries.size and (self.day_boundaries[0] != 0 or np.any(np.diff(self.day_boundaries) < 0)):
            raise DomainError("day_boundaries must start at 0 and be non-decreasing")
        if self.session_dates and len(self.session_dates) != self.day_boundaries.size:
            raise DomainError("session_dates must align with day_boundaries")

    def __len__(self) -> int:
        return int(self.returns.size)

    def by_session(self) -> list[np.ndarray]:
        edges = np.append(self.day_boundaries, self.returns.size)
        return [self.returns[lo:hi] for lo, hi in zip(edges[:-1], edges[1:])]


def build_return_series(aggregates: Sequence[WindowAggregate]) -> ReturnSeries:
    """
    One return per window from its edge prices, never spanning two sessions.

    Windows without a prevailing price at either edge are skipped.
    """
    if not aggregates:
        raise InsufficientHistoryError("No windows to build returns from")
    returns: list[float] = []
    boundaries: list[int] = []
    dates: list[str] = []
    for session_date, windows in group_by_session(aggregates).items():
        boundaries.append(len(returns))
        dates.append(session_date)
        for w in windows:
            if np.isfinite(w.open_price) and np.isfinite(w.close_price) and w.open_price > 0 and w.close_price > 0:
                returns.append(float(np.log(w.close_price / w.open_price)))
    interval = float(np.median([a.duration for a in aggregates]))
    return ReturnSeries(interval, np.array(returns), np.array(boundaries), tuple(dates))


def realized_volatility(series: ReturnSeries, per: Literal["day", "window"] = "day") -> np.ndarray:
    """σ_R = sqrt(Σ r²) per session (``per="day"``) or |r| per window."""
    if per == "window":
        return np.abs(series.returns)
    if per != "day":
        raise DomainError(f"per must be 'day' or 'window', got {per!r}")
    return np.array([np.sqrt(np.sum(r ** 2)) for r in series.by_session()])


def realized_by_session(series: ReturnSeries) -> pd.Series:
    return pd.Series(realized_volatility(series, "day"), index=list(series.session_dates), name="sigma_realized")


def sampled_return_series(quotes: QuoteStream, spec: InstrumentSpec, interval: float = 5.0) -> ReturnSeries:
    """
    Log returns of the prevailing mid sampled every ``interval`` seconds inside each session.

    The grid restarts at every open and the last step is truncated at the close. Quotes from
    a previous session never seed the first sample; steps without a prevailing mid at both
    ends are skipped.
    """
    if not interval > 0:
        raise DomainError(f"interval must be positive, got {interval}")
    if len(quotes) == 0:
        raise InsufficientHistoryError(f"{spec.symbol}: no quotes to sample returns from")
    interval_ns = int(round(interval * NS_PER_SECOND))
    mid = quotes.mid
    returns: list[np.ndarray] = []
    boundaries: list[int] = []
    dates: list[str] = []
    n_returns = 0
    for day in session_days(quotes, TradeStream.empty()):
        open_ns, close_ns = spec.session_bounds_ns(day)
        first = int(np.searchsorted(quotes.ts, (open_ns // NS_PER_DAY) * NS_PER_DAY, side="left"))
        last = int(np.searchsorted(quotes.ts, close_ns, side="left"))
        if last <= first:
            continue
        edges = window_edges(open_ns, close_ns, interval_ns)
        idx = np.searchsorted(quotes.ts[:last], edges, side="right") - 1
        sampled = np.where(idx >= first, mid[np.maximum(idx, 0)], np.nan)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.diff(np.log(sampled))
        r = r[np.isfinite(r)]
        boundaries.append(n_returns)
        dates.append(day.isoformat())
        returns.append(r)
        n_returns += r.size
    if not dates:
        raise InsufficientHistoryError(f"{spec.symbol}: no session holds quotes to sample")
    logger.debug(f"[OK] {spec.symbol}: {n_returns} mid returns every {interval:g}s over {len(dates)} sessions")
    return ReturnSeries(interval, np.concatenate(returns), np.array(boundaries), tuple(dates))


def daily_close_returns(trades: TradeStream, spec: InstrumentSpec) -> pd.Series:
    """
    Close-to-close log returns from each session's last in-session trade.

    Indexed by the session date of the return's end; sessions without trades are skipped.
    """
    if len(trades) == 0:
        raise InsufficientHistoryError(f"{spec.symbol}: no trades to build daily returns from")
    days = pd.to_datetime(trades.ts, unit="ns", utc=True).normalize()
    frame = pd.DataFrame({"ts": trades.ts, "px": trades.px, "day": days})
    closes = {}
    for day, group in frame.groupby("day", sort=True):
        open_ns, close_ns = spec.session_bounds_ns(day.date())
        inside = group[(group["ts"] >= open_ns) & (group["ts"] < close_ns)]
        if not inside.empty:
            closes[day.date().isoformat()] = float(inside["px"].iloc[-1])
    close = pd.Series(closes, name="close").sort_index()
    returns = np.log(close / close.shift(1)).dropna()
    returns.name = "return"
    logger.info(f"[OK] {spec.symbol}: {len(returns)} daily close-to-close returns")
    return returns
