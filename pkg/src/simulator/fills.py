"""
Passive limit-order fill simulation
- One virtual buy order at a time, placed at the prevailing best bid
- Queue position starts at the displayed bid size and is depleted by trades at the
  level first, then pro rata by the remaining size reductions (cancellations)
- Volume printed at or below the order price is counted against the bid-side volume
  while the order's price is still the best bid
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from datetime import date
from typing import Literal, Optional

import numpy as np
import pandas as pd

from src.errors import ConfigurationError, DomainError, SimulationError
from src.estimators.formulas import spread_in_ticks, t_volume, uncorrected_t_volume
from src.marketdata.aggregate import daily_aggregates
from src.marketdata.models import NS_PER_SECOND, InstrumentSpec, QuoteStream, TradeStream, WindowAggregate

logger = logging.getLogger(__name__)

FILL_RESULT_COLUMNS = ["spread_ticks", "measured_fraction", "n_orders", "fill_rate"]


@dataclass(frozen=True)
class HorizonPolicy:
    """
    How long each virtual order lives.

    Args:
        kind: "t_volume" (corrected T_Volume of the session), "t_volume_uncorrected"
            or "fixed"
        seconds: horizon for kind="fixed"
        gap: seconds between an order's horizon end and the next placement
    """

    kind: Literal["t_volume", "t_volume_uncorrected", "fixed"] = "t_volume"
    seconds: Optional[float] = None
    gap: float = 300.0

    def __post_init__(self):
        if self.kind not in ("t_volume", "t_volume_uncorrected", "fixed"):
            raise ConfigurationError(f"Unknown horizon kind {self.kind!r}")
        if self.kind == "fixed" and not (self.seconds is not None and self.seconds > 0):
            raise ConfigurationError("A fixed horizon needs a positive 'seconds' value")
        if self.gap < 0:
            raise ConfigurationError(f"gap must be non-negative, got {self.gap}")

    def horizon(self, day: WindowAggregate, spec: InstrumentSpec) -> float:
        """Horizon in seconds for orders placed during the session summarized by ``day``."""
        if self.kind == "fixed":
            return float(self.seconds)
        if self.kind == "t_volume_uncorrected":
            return uncorrected_t_volume(day)
        return t_volume(day, spec)


@dataclass(frozen=True)
class FillSimResult:
    spread_ticks: float
    measured_fraction: float
    n_orders: int
    fill_rate: float
    symbol: str = ""
    month: str = ""

    def __post_init__(self):
        if not 0.0 <= self.measured_fraction <= 1.0:
            raise SimulationError(f"measured_fraction out of range: {self.measured_fraction}")
        if not 0.0 <= self.fill_rate <= 1.0:
            raise SimulationError(f"fill_rate out of range: {self.fill_rate}")

    def to_row(self) -> dict:
        return asdict(self)


@dataclass
class OrderOutcome:
    placed_ns: int
    price_ticks: int
    initial_queue: float
    filled: bool
    side_volume: float
    at_or_below: float
    session_date: str


@dataclass
class _Order:
    price: int
    ahead: float
    level_size: float
    pending: float = 0.0
    filled: bool = False
    side_volume: float = 0.0
    at_or_below: float = 0.0

    def on_trade(self, px: int, sz: float, weight: float, at_touch: bool) -> None:
        if at_touch and weight > 0:
            self.side_volume += weight * sz
            if px <= self.price:
                self.at_or_below += weight * sz
        if self.filled or px > self.price:
            return
        if px < self.price or sz > self.ahead:
            self.filled = True
            return
        self.ahead -= min(sz, self.ahead)
        self.pending += sz

    def on_quote(self, bid: int, bid_sz: float, was_at_level: bool) -> None:
        if self.filled:
            return
        if bid < self.price:
            self.filled = True
        elif bid == self.price:
            if was_at_level:
                decrease = self.level_size - bid_sz
                if decrease > 0:
                    explained = min(decrease, self.pending)
                    cancelled = decrease - explained
                    remaining = self.level_size - explained
                    if cancelled > 0 and remaining > 0:
                        self.ahead -= cancelled * self.ahead / remaining
            self.ahead = max(0.0, min(self.ahead, bid_sz))
            self.level_size = bid_sz
        self.pending = 0.0


def _bid_side_weight(side: int, px2: int, mid2: int) -> float:
    # px2/mid2 are doubled tick prices so the mid stays an integer
    if side < 0:
        return 1.0
    if side > 0:
        return 0.0
    if px2 < mid2:
        return 1.0
    if px2 == mid2:
        return 0.5
    return 0.0


def _to_ticks(px: np.ndarray, tick_size: float) -> np.ndarray:
    return np.rint(np.asarray(px) / tick_size).astype(np.int64)


@dataclass(frozen=True)
class _Tape:
    """Tick-grid view of one instrument's streams."""

    q_ts: np.ndarray
    q_bid: np.ndarray
    q_ask: np.ndarray
    q_bsz: np.ndarray
    t_ts: np.ndarray
    t_px: np.ndarray
    t_sz: np.ndarray
    t_side: np.ndarray

    @classmethod
    def from_streams(cls, quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec) -> "_Tape":
        return cls(
            q_ts=quotes.ts, q_bid=_to_ticks(quotes.bid_px, spec.tick_size),
            q_ask=_to_ticks(quotes.ask_px, spec.tick_size), q_bsz=quotes.bid_sz,
            t_ts=trades.ts, t_px=_to_ticks(trades.px, spec.tick_size), t_sz=trades.sz, t_side=trades.side,
        )

    def first_quote_after(self, t: int) -> Optional[int]:
        i = int(np.searchsorted(self.q_ts, t, side="left"))
        return int(self.q_ts[i]) if i < len(self.q_ts) else None

    def run_order(self, start: int, end: int, session_date: str) -> OrderOutcome:
        """Replay (start, end] against a buy order joining the best bid prevailing at ``start``."""
        qi = int(np.searchsorted(self.q_ts, start, side="right")) - 1
        order = _Order(price=int(self.q_bid[qi]), ahead=float(self.q_bsz[qi]), level_size=float(self.q_bsz[qi]))
        initial_queue = order.ahead
        bid, ask = int(self.q_bid[qi]), int(self.q_ask[qi])

        i, q_hi = qi + 1, int(np.searchsorted(self.q_ts, end, side="right"))
        j = int(np.searchsorted(self.t_ts, start, side="right"))
        t_hi = int(np.searchsorted(self.t_ts, end, side="right"))
        while i < q_hi or j < t_hi:
            # trades first on equal timestamps
            if j < t_hi and (i >= q_hi or self.t_ts[j] <= self.q_ts[i]):
                px = int(self.t_px[j])
                weight = _bid_side_weight(int(self.t_side[j]), 2 * px, bid + ask)
                order.on_trade(px, float(self.t_sz[j]), weight, at_touch=bid == order.price)
                j += 1
            else:
                was_at_level = bid == order.price
                bid, ask = int(self.q_bid[i]), int(self.q_ask[i])
                order.on_quote(bid, float(self.q_bsz[i]), was_at_level)
                i += 1
        return OrderOutcome(int(start), order.price, initial_queue, order.filled,
                            order.side_volume, order.at_or_below, session_date)


def run_virtual_orders(quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec,
                       horizon_policy: Optional[HorizonPolicy] = None,
                       days: Optional[Sequence[WindowAggregate]] = None) -> list[OrderOutcome]:
    """
    Place virtual orders back to back through every session and replay each one.

    Sessions whose horizon is undefined (no trades) are skipped with a warning.
    Orders whose horizon would run past the session close are not placed.
    """
    policy = horizon_policy or HorizonPolicy()
    tape = _Tape.from_streams(quotes, trades, spec)
    days = daily_aggregates(quotes, trades, spec) if days is None else days
    outcomes: list[OrderOutcome] = []
    gap_ns = int(round(policy.gap * NS_PER_SECOND))
    for day in days:
        try:
            horizon = policy.horizon(day, spec)
        except DomainError as e:
            logger.warning(f"[WARN] {spec.symbol} {day.session_date}: no fill horizon ({e})")
            continue
        horizon_ns = int(round(horizon * NS_PER_SECOND))
        if horizon_ns <= 0 or horizon_ns > day.window_end - day.window_start:
            logger.warning(f"[WARN] {spec.symbol} {day.session_date}: horizon {horizon:.1f}s does not fit the session")
            continue
        # the first order joins a quote posted inside this session, never a previous close
        t = tape.first_quote_after(day.window_start)
        if t is None:
            continue
        while t + horizon_ns <= day.window_end:
            outcomes.append(tape.run_order(t, t + horizon_ns, day.session_date))
            t += horizon_ns + gap_ns
    return outcomes


def _month(session_date: str) -> str:
    return date.fromisoformat(session_date).strftime("%Y-%m")


def simulate_passive_fills(quotes: QuoteStream, trades: TradeStream, spec: InstrumentSpec,
                           horizon_policy: Optional[HorizonPolicy] = None) -> list[FillSimResult]:
    """
    Measure the share of bid-side volume printed at or below a passive buy order's price.

    Args:
        quotes: time-sorted quote stream
        trades: time-sorted trade stream
        spec: instrument metadata (tick size and session bounds)
        horizon_policy: order lifetime; corrected session T_Volume by default

    Returns:
        One FillSimResult per calendar month, oldest first. ``spread_ticks`` is the mean
        session spread in ticks over the month.
    """
    if len(quotes) == 0 or len(trades) == 0:
        raise SimulationError(f"{spec.symbol}: fill simulation needs non-empty quote and trade streams")
    days = daily_aggregates(quotes, trades, spec)
    outcomes = run_virtual_orders(quotes, trades, spec, horizon_policy, days)
    if not outcomes:
        raise SimulationError(f"{spec.symbol}: no virtual order could be placed")

    spreads = pd.DataFrame({
        "month": [_month(d.session_date) for d in days if d.valid],
        "spread_ticks": [spread_in_ticks(d.avg_spread, spec.tick_size) for d in days if d.valid],
    }).groupby("month")["spread_ticks"].mean()
    frame = pd.DataFrame([asdict(o) for o in outcomes])
    frame["month"] = frame["session_date"].map(_month)

    results = []
    for month, group in frame.groupby("month", sort=True):
        side_volume = float(group["side_volume"].sum())
        if side_volume <= 0:
            logger.warning(f"[WARN] {spec.symbol} {month}: no bid-side volume while orders rested, month skipped")
            continue
        results.append(FillSimResult(
            spread_ticks=float(spreads.get(month, math.nan)),
            measured_fraction=min(1.0, float(group["at_or_below"].sum()) / side_volume),
            n_orders=int(len(group)),
            fill_rate=float(group["filled"].mean()),
            symbol=spec.symbol,
            month=month,
        ))
    logger.info(f"[OK] {spec.symbol}: {len(outcomes)} virtual orders over {len(results)} months")
    return results


def fill_results_frame(results: Sequence[FillSimResult]) -> pd.DataFrame:
    columns = ["symbol", "month"] + FILL_RESULT_COLUMNS
    return pd.DataFrame([r.to_row() for r in results], columns=columns)
