"""
Synthetic market generator
- Binary random walk of the mid on the tick grid, constant spread of n ticks
- Book sizes resampled around book_depth_per_level on every quote update
- Poisson trades, half on each side. A print lands a normally distributed number of
  ticks inside the spread from its touch, scaled by the interior width; draws on the
  outside collapse onto the touch
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from scipy import stats

from src.errors import SimulationError
from src.estimators.formulas import correction_coefficient
from src.marketdata.io import write_quotes, write_trades
from src.marketdata.models import NS_PER_SECOND, InstrumentSpec, QuoteStream, TradeStream
from src.simulator.config import SimConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratedMarket:
    quotes_path: Path
    trades_path: Path
    instrument_path: Path
    n_quotes: int
    n_trades: int


def price_step_rate(config: SimConfig, multiplier: float = 1.0) -> float:
    """Tick moves per second so that the mid's std over one window equals true_sigma."""
    sigma = config.true_sigma * multiplier
    return (sigma / config.tick_size) ** 2 / config.window


def calibrate_equilibrium(config: SimConfig) -> SimConfig:
    """
    Return ``config`` with the trade rate that makes T_Price = T_Volume analytically.

    With ⟨spread⟩ = n·TS, σ(ΔT) = true_sigma, ⟨V_BID⟩+⟨V_ASK⟩ = 2·book_depth_per_level and
    V_Traded(ΔT) = rate·mean_trade_size·ΔT, equating the two times gives
    rate = 2·book·σ² / (spread²·mean_trade_size·ΔT·P(n)).
    """
    p = correction_coefficient(float(config.spread_ticks))
    rate = (2.0 * config.book_depth_per_level * config.true_sigma ** 2
            / (config.spread ** 2 * config.mean_trade_size * config.window * p))
    if not (np.isfinite(rate) and rate > 0):
        raise SimulationError(f"Equilibrium is infeasible for {config.symbol}: required trade_rate={rate}")
    if rate == config.trade_rate:
        return config
    logger.info(f"[SIM] {config.symbol}: equilibrium trade_rate {config.trade_rate:g} -> {rate:.6g} trades/s")
    return config.with_updates(trade_rate=float(rate))


def _strictly_increasing(ts: np.ndarray) -> np.ndarray:
    # max-accumulate of (ts - i), then add i back: the smallest strictly increasing sequence >= ts
    if ts.size == 0:
        return ts
    offsets = np.arange(ts.size, dtype=np.int64)
    return np.maximum.accumulate(ts - offsets) + offsets


def _arrival_times(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """Poisson arrival times on [0, horizon), sorted."""
    if rate <= 0:
        return np.empty(0)
    count = rng.poisson(rate * horizon)
    return np.sort(rng.uniform(0.0, horizon, size=count))


def _sizes(rng: np.random.Generator, mean: float, shape) -> np.ndarray:
    lo = max(1, int(round(mean / 2)))
    hi = max(lo, int(round(2 * mean)) - lo)
    return rng.integers(lo, hi + 1, size=shape).astype(np.float64)


def _print_offsets(rng: np.random.Generator, spread_ticks: int, dispersion: float, count: int) -> np.ndarray:
    """
    Ticks between each print and its own touch, in 0..n-1.

    Offsets are N(0, (dispersion·(n-1))²) rounded to the grid; negative draws sweep the
    touch and print there. A one-tick market always prints at the touch.
    """
    if spread_ticks == 1 or count == 0:
        return np.zeros(count, dtype=np.int64)
    draws = rng.normal(0.0, dispersion * (spread_ticks - 1), size=count)
    return np.clip(np.rint(draws), 0, spread_ticks - 1).astype(np.int64)


def touch_share(spread_ticks: int, dispersion: float) -> float:
    """Expected share of one side's prints at its touch: Φ(0.5 / (dispersion·(n-1)))."""
    if spread_ticks == 1:
        return 1.0
    return float(stats.norm.cdf(0.5 / (dispersion * (spread_ticks - 1))))


def _business_days(config: SimConfig) -> list:
    return [d.date() for d in pd.bdate_range(config.start_date, periods=config.n_days)]


def simulate_streams(config: SimConfig) -> tuple[QuoteStream, TradeStream, InstrumentSpec]:
    """Generate the full multi-session quote and trade streams in memory."""
    spec = config.instrument_spec()
    days = _business_days(config)
    children = np.random.SeedSequence(config.seed).spawn(len(days))
    n = config.spread_ticks
    levels = config.depth_levels
    S = config.session_length

    bid_ticks = int(round((config.initial_price - config.spread / 2) / config.tick_size))
    q_parts, t_parts = [], []
    for day_index, (day, child) in enumerate(zip(days, children)):
        rng = np.random.default_rng(child)
        m = config.sigma_multiplier(day_index)
        open_ns, close_ns = spec.session_bounds_ns(day)

        move_t = _arrival_times(rng, price_step_rate(config, m), S)
        steps = rng.choice(np.array([-1, 1], dtype=np.int64), size=move_t.size)
        refresh_t = _arrival_times(rng, config.quote_rate, S)
        quote_t = np.concatenate([[0.0], move_t, refresh_t])
        order = np.argsort(quote_t, kind="stable")
        quote_t = quote_t[order]
        # cumulative tick moves in force at each quote update
        moved = np.concatenate([[0], np.cumsum(steps)])
        n_moves_before = np.searchsorted(move_t, quote_t, side="right")
        q_bid = bid_ticks + moved[n_moves_before]
        q_ask = q_bid + n

        n_q = quote_t.size
        bid_sz = _sizes(rng, config.book_depth_per_level, n_q)
        ask_sz = _sizes(rng, config.book_depth_per_level, n_q)
        depth = np.arange(1, levels, dtype=np.int64)
        bid_depth_px = (q_bid[:, None] - depth[None, :]) * config.tick_size
        ask_depth_px = (q_ask[:, None] + depth[None, :]) * config.tick_size
        bid_depth_sz = _sizes(rng, config.book_depth_per_level, (n_q, levels - 1))
        ask_depth_sz = _sizes(rng, config.book_depth_per_level, (n_q, levels - 1))
        q_ts = _strictly_increasing(open_ns + np.floor(quote_t * NS_PER_SECOND).astype(np.int64))

        trade_t = _arrival_times(rng, config.trade_rate * m ** 2, S)
        n_t = trade_t.size
        sides = rng.choice(np.array([1, -1], dtype=np.int8), size=n_t)
        offset = _print_offsets(rng, n, config.print_dispersion, n_t)
        sizes = rng.geometric(1.0 / config.mean_trade_size, size=n_t).astype(np.float64)
        t_ts = _strictly_increasing(open_ns + np.floor(trade_t * NS_PER_SECOND).astype(np.int64))
        keep = t_ts < close_ns
        prevailing = np.searchsorted(q_ts, t_ts, side="right") - 1
        bid_at_trade = q_bid[prevailing]
        ask_at_trade = bid_at_trade + n
        price_ticks = np.where(sides < 0, bid_at_trade + offset, ask_at_trade - offset)

        q_parts.append((q_ts, q_bid * config.tick_size, bid_sz, q_ask * config.tick_size, ask_sz,
                        bid_depth_px, bid_depth_sz, ask_depth_px, ask_depth_sz))
        t_parts.append((t_ts[keep], price_ticks[keep] * config.tick_size, sizes[keep], sides[keep]))
        bid_ticks = int(q_bid[-1])
        if bid_ticks - levels <= 0:
            raise SimulationError(f"{config.symbol}: simulated price walked to zero on {day}")

    def stack(parts, i):
        return np.concatenate([p[i] for p in parts])

    quotes = QuoteStream(*(stack(q_parts, i) for i in range(9)))
    trades = TradeStream(*(stack(t_parts, i) for i in range(4)))
    logger.info(f"[SIM] {config.symbol}: {len(days)} sessions, {len(quotes)} quotes, {len(trades)} trades")
    return quotes, trades, spec


def generate_market(config: SimConfig, out_dir: Union[str, Path]) -> GeneratedMarket:
    """
    Write ``<symbol>.quotes.csv``, ``<symbol>.trades.csv`` and ``<symbol>.instrument.json``.

    Output is deterministic per seed.
    """
    out_dir = Path(out_dir)
    quotes, trades, spec = simulate_streams(config)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        quotes_path = write_quotes(quotes, out_dir / f"{config.symbol}.quotes.csv", spec)
        trades_path = write_trades(trades, out_dir / f"{config.symbol}.trades.csv", spec)
        instrument_path = out_dir / f"{config.symbol}.instrument.json"
        instrument_path.write_text(spec.to_json(), encoding="utf-8")
    except OSError as e:
        raise SimulationError(f"Cannot write simulated market to {out_dir}: {e}") from e
    logger.info(f"[DIR] {config.symbol}: market files written to {out_dir}")
    return GeneratedMarket(quotes_path, trades_path, instrument_path, len(quotes), len(trades))
