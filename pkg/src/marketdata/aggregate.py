"""
Time-window aggregation of quote/trade streams into WindowAggregate records.

Quote state is piecewise constant: the last quote at or before t prevails at t. Averages
are integrals of that step function divided by the covered time, so splitting a quote
interval into identical sub-intervals leaves every average unchanged.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from typing import Literal

import numpy as np

from src.errors import ConfigurationError
from src.marketdata.models import NS_PER_SECOND, InstrumentSpec, QuoteStream, TradeStream, WindowAggregate

logger = logging.getLogger(__name__)

NS_PER_DAY = 86_400 * NS_PER_SECOND
DAILY_SUB_WINDOW = 300.0


@dataclass(frozen=True)
class AggregationConfig:
    """
    Args:
        window: ΔT in seconds
        sub_intervals: sub-intervals per window used for price_std
        volume_averaging: "time" (time-weighted) or "event" (mean over quote updates in the window)
        book_levels: 1 for touch sizes, 3-5 for the depth-averaged variant
        price_source: "mid" (time-weighted mid) or "last_trade" (last print in the window)
    """

    window: float = 300.0
    sub_intervals: int = 5
    volume_averaging: Literal["time", "event"] = "time"
    book_levels: int = 1
    price_source: Literal["mid", "last_trade"] = "mid"

    def __post_init__(self):
        if not self.window > 0:
            raise ConfigurationError(f"window must be positive, got {self.window}")
        if self.sub_intervals < 1:
            raise ConfigurationError(f"sub_intervals must be >= 1, got {self.sub_intervals}")
        if self.volume_averaging not in ("time", "event"):
            raise ConfigurationError(f"volume_averaging must be 'time' or 'event', got {self.volume_averaging!r}")
        if not 1 <= self.book_levels <= 5:
            raise ConfigurationError(f"book_levels must be in 1..5, got {self.book_levels}")
        if self.price_source not in ("mid", "last_trade"):
            raise ConfigurationError(f"price_source must be 'mid' or 'last_trade', got {self.price_source!r}")

    @property
    def window_ns(self) -> int:
        return int(round(self.window * NS_PER_SECOND))


class _StepFunction:
    """Piecewise-constant quote state over one session, time measured in seconds from open."""

    def __init__(self, t: np.ndarray, session_seconds: float):
        self.starts = np.maximum(t, 0.0)
        ends = np.append(self.starts[1:], session_seconds)
        self.lengths = np.maximum(ends - self.starts, 0.0)
        self._coverage = np.concatenate([[0.0], np.cumsum(self.lengths)])

    def index_at(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.starts, x, side="right") - 1

    def value_at(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        idx = self.index_at(x)
        out = np.full(np.shape(x), np.nan)
        has = idx >= 0
        out[has] = values[idx[has]]
        return out

    def _integral(self, cumulative: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        idx = self.index_at(x)
        out = np.zeros(np.shape(x))
        has = idx >= 0
        i = idx[has]
        out[has] = cumulative[i] + values[i] * (x[has] - self.starts[i])
        return out

    def average(self, values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Time-weighted average of ``values`` over each [lo, hi) and the covered seconds."""
        cumulative = np.concatenate([[0.0], np.cumsum(values * self.lengths)])
        ones = np.ones_like(values)
        covered = self._integral(self._coverage, ones, hi) - self._integral(self._coverage, ones, lo)
        total = self._integral(cumulative, values, hi) - self._integral(cumulative, values, lo)
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = np.where(covered > 0, total / np.where(covered > 0, covered, 1.0), np.nan)
        return avg, covered


def session_days(quotes: QuoteStream, trades: TradeStream) -> list[date]:
    """UTC calendar days touched by either stream, ascending."""
    stamps = np.concatenate([np.asarray(quotes.ts), np.asarray(trades.ts)])
    if stamps.size == 0:
        return []
    day_numbers = np.unique(stamps // NS_PER_DAY)
    return [datetime.fromtimestamp(int(d) * 86_400, tz=timezone.utc).date() for d in day_numbers]


def window_edges(open_ns: int, close_ns: int, window_ns: int) -> np.ndarray:
    """Contiguous window edges from open to close; the last window is truncated at close."""
    edges = np.arange(open_ns, close_ns, window_ns, dtype=np.int64)
    return np.append(edges, np.int64(close_ns))


def aggregate_windows(quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec,
                      window: float | AggregationConfig = 300.0) -> list[WindowAggregate]:
    """
    Partition every session touched by the streams into windows of length ΔT.

    Args:
        quotes: time-sorted quotes
        trades: time-sorted trades
        spec: instrument metadata (session bounds)
        window: ΔT in seconds, or a full AggregationConfig

    Returns:
        WindowAggregate records in time order
    """
    config = window if isinstance(window, AggregationConfig) else AggregationConfig(window=float(window))
    if config.window > spec.session_seconds:
        raise ConfigurationError(
            f"Window {config.window}s is longer than the {spec.symbol} session ({spec.session_seconds}s)"
        )
    if config.book_levels > quotes.depth_levels and len(quotes):
        raise ConfigurationError(
            f"book_levels={config.book_levels} requested but quotes carry {quotes.depth_levels} levels"
        )

    aggregates: list[WindowAggregate] = []
    for day in session_days(quotes, trades):
        aggregates.extend(_aggregate_session(quotes, trades, spec, config, day))

    n_valid = sum(a.valid for a in aggregates)
    logger.info(f"[OK] {spec.symbol}: {len(aggregates)} windows of {config.window:g}s, {n_valid} valid")
    return aggregates


def _aggregate_session(quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec,
                       config: AggregationConfig, day: date) -> list[WindowAggregate]:
    open_ns, close_ns = spec.session_bounds_ns(day)
    midnight_ns = (open_ns // NS_PER_DAY) * NS_PER_DAY
    session_s = (close_ns - open_ns) / NS_PER_SECOND
    edges_ns = window_edges(open_ns, close_ns, config.window_ns)
    n_windows = len(edges_ns) - 1
    lo_ns, hi_ns = edges_ns[:-1], edges_ns[1:]
    lo = (lo_ns - open_ns) / NS_PER_SECOND
    hi = (hi_ns - open_ns) / NS_PER_SECOND

    # Quotes from earlier on the same day seed the state at the open; the previous session never does.
    q0 = int(np.searchsorted(quotes.ts, midnight_ns, side="left"))
    q1 = int(np.searchsorted(quotes.ts, close_ns, side="left"))
    q = quotes.subset(q0, q1)
    t_q = (q.ts - open_ns) / NS_PER_SECOND
    step = _StepFunction(t_q, session_s)

    bid_vol, ask_vol = q.book_volumes(config.book_levels) if len(q) else (np.empty(0), np.empty(0))
    mid = q.mid

    avg_spread, covered = step.average(q.spread, lo, hi)
    avg_mid, _ = step.average(mid, lo, hi)
    n_quotes = np.diff(np.searchsorted(q.ts, edges_ns, side="left"))

    if config.volume_averaging == "time":
        avg_bid, _ = step.average(bid_vol, lo, hi)
        avg_ask, _ = step.average(ask_vol, lo, hi)
    else:
        avg_bid = _event_average(q.ts, bid_vol, edges_ns, step.value_at(bid_vol, lo))
        avg_ask = _event_average(q.ts, ask_vol, edges_ns, step.value_at(ask_vol, lo))

    t0 = int(np.searchsorted(trades.ts, open_ns, side="left"))
    t1 = int(np.searchsorted(trades.ts, close_ns, side="left"))
    t_idx = np.searchsorted(edges_ns, trades.ts[t0:t1], side="right") - 1
    traded_volume = np.bincount(t_idx, weights=trades.sz[t0:t1], minlength=n_windows)
    n_trades = np.bincount(t_idx, minlength=n_windows)

    avg_price = avg_mid
    if config.price_source == "last_trade":
        avg_price = _last_trade_price(trades.px[t0:t1], t_idx, n_windows, fallback=avg_mid)

    # Prevailing mid at the sub-interval edges of every window, shape (n_windows, m + 1)
    m = config.sub_intervals
    frac = np.arange(m + 1) / m
    sub_edges = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    sub_mid = step.value_at(mid, sub_edges.ravel()).reshape(sub_edges.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        log_returns = np.diff(np.log(sub_mid), axis=1)
    sum_sq = np.nansum(log_returns ** 2, axis=1)
    price_std = np.where(np.isfinite(avg_price), avg_price * np.sqrt(sum_sq), 0.0)

    full_ns = config.window_ns
    session_date = day.isoformat()
    out = []
    for k in range(n_windows):
        has_state = covered[k] > 0
        spread_k = float(avg_spread[k]) if has_state else 0.0
        valid = bool(has_state and n_trades[k] > 0 and n_quotes[k] > 0 and spread_k > 0)
        out.append(WindowAggregate(
            window_start=int(lo_ns[k]),
            window_end=int(hi_ns[k]),
            avg_spread=spread_k,
            avg_bid_vol=float(avg_bid[k]) if has_state else 0.0,
            avg_ask_vol=float(avg_ask[k]) if has_state else 0.0,
            avg_price=float(avg_price[k]) if has_state else float("nan"),
            traded_volume=float(traded_volume[k]),
            price_std=float(price_std[k]) if has_state else 0.0,
            n_quotes=int(n_quotes[k]),
            n_trades=int(n_trades[k]),
            valid=valid,
            session_date=session_date,
            truncated=bool(hi_ns[k] - lo_ns[k] < full_ns),
            open_price=float(sub_mid[k, 0]),
            close_price=float(sub_mid[k, -1]),
        ))
    return out


def _event_average(ts: np.ndarray, values: np.ndarray, edges_ns: np.ndarray, prevailing: np.ndarray) -> np.ndarray:
    n_windows = len(edges_ns) - 1
    idx = np.searchsorted(edges_ns, ts, side="right") - 1
    inside = (idx >= 0) & (idx < n_windows)
    sums = np.bincount(idx[inside], weights=values[inside], minlength=n_windows)
    counts = np.bincount(idx[inside], minlength=n_windows)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), prevailing)


def _last_trade_price(px: np.ndarray, t_idx: np.ndarray, n_windows: int, fallback: np.ndarray) -> np.ndarray:
    last = np.full(n_windows, np.nan)
    if len(px):
        # t_idx is non-decreasing: window k's last trade sits right before the first trade of k + 1
        windows = np.arange(n_windows)
        last_pos = np.searchsorted(t_idx, windows, side="right") - 1
        has = (last_pos >= 0) & (t_idx[np.maximum(last_pos, 0)] == windows)
        last[has] = px[last_pos[has]]
    return np.where(np.isfinite(last), last, fallback)


def merge_windows(aggregates: Sequence[WindowAggregate]) -> WindowAggregate:
    """
    Combine consecutive windows into one aggregate spanning all of them.

    Averages are duration-weighted over the valid windows only; traded volume and counts
    are summed over every window; price_std is ⟨Price⟩·sqrt(Σ r²) with r the windows'
    edge-to-edge log returns.
    """
    if not aggregates:
        raise ConfigurationError("Cannot merge an empty sequence of windows")
    valid = [a for a in aggregates if a.valid]
    traded = float(sum(a.traded_volume for a in aggregates))
    n_quotes = int(sum(a.n_quotes for a in aggregates))
    n_trades = int(sum(a.n_trades for a in aggregates))
    first, last = aggregates[0], aggregates[-1]
    base = dict(window_start=first.window_start, window_end=last.window_end, traded_volume=traded,
                n_quotes=n_quotes, n_trades=n_trades, session_date=first.session_date,
                truncated=any(a.truncated for a in aggregates),
                open_price=first.open_price, close_price=last.close_price)
    if not valid:
        return WindowAggregate(avg_spread=0.0, avg_bid_vol=0.0, avg_ask_vol=0.0, avg_price=float("nan"),
                               price_std=0.0, valid=False, **base)

    weights = np.array([a.duration for a in valid])

    def weighted(attr: str) -> float:
        return float(np.average([getattr(a, attr) for a in valid], weights=weights))

    avg_spread = weighted("avg_spread")
    avg_price = weighted("avg_price")
    opens = np.array([a.open_price for a in aggregates])
    closes = np.array([a.close_price for a in aggregates])
    ok = np.isfinite(opens) & np.isfinite(closes) & (opens > 0) & (closes > 0)
    sum_sq = float(np.sum(np.log(closes[ok] / opens[ok]) ** 2))
    return WindowAggregate(
        avg_spread=avg_spread,
        avg_bid_vol=weighted("avg_bid_vol"),
        avg_ask_vol=weighted("avg_ask_vol"),
        avg_price=avg_price,
        price_std=avg_price * float(np.sqrt(sum_sq)),
        valid=bool(n_trades > 0 and n_quotes > 0 and avg_spread > 0),
        **base,
    )


def group_by_session(aggregates: Sequence[WindowAggregate]) -> dict[str, list[WindowAggregate]]:
    sessions: dict[str, list[WindowAggregate]] = {}
    for agg in aggregates:
        sessions.setdefault(agg.session_date, []).append(agg)
    return sessions


def daily_aggregates(quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec,
                     config: AggregationConfig | None = None) -> list[WindowAggregate]:
    """
    One aggregate per session built from 5-minute windows (or ``config.window``).

    The session's σ(ΔT) comes from the sub-window returns, so ΔT is the whole session and
    traded_volume is the session total.
    """
    config = config or AggregationConfig(window=DAILY_SUB_WINDOW, sub_intervals=1)
    windows = aggregate_windows(quotes, trades, spec, config)
    days = [merge_windows(group) for group in group_by_session(windows).values()]
    return [replace(d, truncated=False) for d in days]
