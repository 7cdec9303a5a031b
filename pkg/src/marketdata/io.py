"""CSV emission for streams and aggregates (same schemas the ingestion side reads)."""

from collections.abc import Sequence
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from src.marketdata.ingest import depth_columns
from src.marketdata.models import (
    AGGREGATE_COLUMNS,
    INT_SIDE,
    SIDE_TO_CODE,
    InstrumentSpec,
    QuoteStream,
    TradeStream,
    WindowAggregate,
)


def _price_text(values: np.ndarray, decimals: int) -> list[str]:
    return [f"{v:.{decimals}f}" for v in values]


def _size_text(values: np.ndarray) -> list[str]:
    return [f"{v:.0f}" if float(v).is_integer() else repr(float(v)) for v in values]


def write_quotes(quotes: QuoteStream, path: Union[str, Path], spec: InstrumentSpec) -> Path:
    """Write quotes with prices rounded to the instrument's decimals."""
    path = Path(path)
    d = spec.price_decimals
    frame = {
        "ts_ns": quotes.ts,
        "bid_px": _price_text(quotes.bid_px, d),
        "bid_sz": _size_text(quotes.bid_sz),
        "ask_px": _price_text(quotes.ask_px, d),
        "ask_sz": _size_text(quotes.ask_sz),
    }
    levels = quotes.depth_levels
    for j, level in enumerate(range(2, levels + 1)):
        frame[f"bid{level}_px"] = _price_text(quotes.bid_depth_px[:, j], d)
        frame[f"bid{level}_sz"] = _size_text(quotes.bid_depth_sz[:, j])
    for j, level in enumerate(range(2, levels + 1)):
        frame[f"ask{level}_px"] = _price_text(quotes.ask_depth_px[:, j], d)
        frame[f"ask{level}_sz"] = _size_text(quotes.ask_depth_sz[:, j])
    columns = ["ts_ns", "bid_px", "bid_sz", "ask_px", "ask_sz"] + depth_columns(levels)
    pd.DataFrame(frame, columns=columns).to_csv(path, index=False, lineterminator="\n")
    return path


def write_trades(trades: TradeStream, path: Union[str, Path], spec: InstrumentSpec) -> Path:
    path = Path(path)
    frame = pd.DataFrame({
        "ts_ns": trades.ts,
        "px": _price_text(trades.px, spec.price_decimals),
        "sz": _size_text(trades.sz),
        "side": [SIDE_TO_CODE[INT_SIDE[int(s)]] for s in trades.side],
    }, columns=["ts_ns", "px", "sz", "side"])
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def aggregates_frame(aggregates: Sequence[WindowAggregate]) -> pd.DataFrame:
    return pd.DataFrame([a.to_dict() for a in aggregates], columns=AGGREGATE_COLUMNS)


def write_aggregates(aggregates: Sequence[WindowAggregate], path: Union[str, Path]) -> Path:
    """One row per window with every WindowAggregate field."""
    path = Path(path)
    aggregates_frame(aggregates).to_csv(path, index=False, lineterminator="\n")
    return path
