"""Builders for hand-made streams and aggregates."""

import numpy as np

from src.marketdata.models import NS_PER_SECOND, QuoteStream, TradeStream, WindowAggregate


def quote_stream(rows) -> QuoteStream:
    """rows of (ts, bid_px, bid_sz, ask_px, ask_sz)"""
    if not rows:
        return QuoteStream.empty()
    cols = list(zip(*rows))
    return QuoteStream(np.array(cols[0], dtype=np.int64), *(np.array(c, dtype=float) for c in cols[1:]))


def trade_stream(rows) -> TradeStream:
    """rows of (ts, px, sz) or (ts, px, sz, side)"""
    if not rows:
        return TradeStream.empty()
    cols = list(zip(*rows))
    side = np.array(cols[3], dtype=np.int8) if len(cols) > 3 else None
    return TradeStream(np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=float),
                       np.array(cols[2], dtype=float), side)


def window(duration: float = 300.0, spread: float = 0.01, bid_vol: float = 500.0, ask_vol: float = 500.0,
           price: float = 100.0, traded: float = 1000.0, price_std: float = 0.01, n_trades: int = 10,
           n_quotes: int = 10, **extra) -> WindowAggregate:
    valid = n_trades > 0 and n_quotes > 0 and spread > 0
    return WindowAggregate(
        window_start=0,
        window_end=int(round(duration * NS_PER_SECOND)),
        avg_spread=spread,
        avg_bid_vol=bid_vol,
        avg_ask_vol=ask_vol,
        avg_price=price,
        traded_volume=traded,
        price_std=price_std,
        n_quotes=n_quotes,
        n_trades=n_trades,
        valid=extra.pop("valid", valid),
        **extra,
    )
