"""
Quote and trade file ingestion
- Schema checks with line-numbered parse errors
- Ordering checks with a small re-sort tolerance
- Locked/crossed quote removal (counted, never clamped)
"""

import logging
import re
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from src.errors import MarketDataParseError, OrderingError
from src.marketdata.models import (
    MAX_DEPTH_LEVELS,
    SIDE_CODES,
    SIDE_INT,
    InstrumentSpec,
    QuoteStream,
    TradeStream,
)

logger = logging.getLogger(__name__)

DEFAULT_ORDERING_TOLERANCE_NS = 1_000_000  # 1 ms

QUOTE_BASE_COLUMNS = ["ts_ns", "bid_px", "bid_sz", "ask_px", "ask_sz"]
TRADE_BASE_COLUMNS = ["ts_ns", "px", "sz"]

# First data row is line 2 (header is line 1)
_FIRST_DATA_LINE = 2


def depth_columns(levels: int) -> list[str]:
    """Optional depth columns for levels 2..levels, bid side first within each level."""
    cols = []
    for level in range(2, levels + 1):
        cols += [f"bid{level}_px", f"bid{level}_sz"]
    for level in range(2, levels + 1):
        cols += [f"ask{level}_px", f"ask{level}_sz"]
    return cols


def _read_raw(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    except FileNotFoundError:
        raise
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise MarketDataParseError(f"Malformed row: {e}", path=path, line=line) from e


def _numeric(df: pd.DataFrame, column: str, path: Path, dtype=np.float64) -> np.ndarray:
    values = pd.to_numeric(df[column].str.strip(), errors="coerce")
    bad = values.isna().to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise MarketDataParseError(
            f"Column '{column}' has unparseable value '{df[column].iloc[row]}'",
            path=path, line=row + _FIRST_DATA_LINE,
        )
    if dtype is np.int64:
        as_float = values.to_numpy(dtype=np.float64)
        if not np.all(np.isfinite(as_float)) or np.any(as_float != np.floor(as_float)):
            row = int(np.flatnonzero(~np.isfinite(as_float) | (as_float != np.floor(as_float)))[0])
            raise MarketDataParseError(f"Column '{column}' must hold integer nanoseconds",
                                       path=path, line=row + _FIRST_DATA_LINE)
        return values.astype(np.int64).to_numpy()
    arr = values.to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        row = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise MarketDataParseError(f"Column '{column}' has a non-finite value",
                                   path=path, line=row + _FIRST_DATA_LINE)
    return arr


def _first_failing(mask: np.ndarray) -> int:
    return int(np.flatnonzero(mask)[0]) + _FIRST_DATA_LINE


def _check_ordering(ts: np.ndarray, path: Path, tolerance_ns: int) -> np.ndarray:
    """Return a stable sort order for ``ts``, raising when a regression exceeds the tolerance."""
    if len(ts) < 2:
        return np.arange(len(ts))
    running_max = np.maximum.accumulate(ts)
    regression = running_max - ts
    too_far = regression > tolerance_ns
    if too_far.any():
        row = int(np.flatnonzero(too_far)[0])
        raise OrderingError(
            f"Timestamp regresses by {int(regression[row])} ns (tolerance {tolerance_ns} ns)",
            path=path, line=row + _FIRST_DATA_LINE,
        )
    if np.any(regression > 0):
        logger.warning(f"[WARN] {path}: {int(np.count_nonzero(regression > 0))} rows re-sorted within tolerance")
    return np.argsort(ts, kind="stable")


def ingest_quotes(path: Union[str, Path], spec: InstrumentSpec,
                  ordering_tolerance_ns: int = DEFAULT_ORDERING_TOLERANCE_NS) -> QuoteStream:
    """
    Read a quotes CSV into a time-sorted QuoteStream.

    Rows with ask_px - bid_px <= 0 (locked or crossed book) are dropped and counted in
    ``QuoteStream.dropped``.

    Args:
        path: quotes CSV with header ts_ns,bid_px,bid_sz,ask_px,ask_sz[,bid2_px,...,ask5_sz]
        spec: instrument the file belongs to (used for logging and price rounding)
        ordering_tolerance_ns: regressions up to this size are re-sorted instead of rejected

    Returns:
        QuoteStream sorted by ts
    """
    path = Path(path)
    df = _read_raw(path)
    if df.empty and len(df.columns) == 0:
        logger.info(f"[OK] {spec.symbol}: {path} is empty")
        return QuoteStream.empty()

    columns = [c.strip() for c in df.columns]
    df.columns = columns
    if columns[:len(QUOTE_BASE_COLUMNS)] != QUOTE_BASE_COLUMNS:
        raise MarketDataParseError(f"Quotes header must start with {','.join(QUOTE_BASE_COLUMNS)}, got {','.join(columns)}",
                                   path=path, line=1)
    levels = 1
    for candidate in range(MAX_DEPTH_LEVELS, 1, -1):
        if set(depth_columns(candidate)) <= set(columns):
            levels = candidate
            break
    unknown = set(columns) - set(QUOTE_BASE_COLUMNS) - set(depth_columns(levels))
    if unknown:
        raise MarketDataParseError(f"Unexpected quote columns: {sorted(unknown)}", path=path, line=1)

    if df.empty:
        return QuoteStream.empty()

    ts = _numeric(df, "ts_ns", path, dtype=np.int64)
    bid_px = _numeric(df, "bid_px", path)
    bid_sz = _numeric(df, "bid_sz", path)
    ask_px = _numeric(df, "ask_px", path)
    ask_sz = _numeric(df, "ask_sz", path)
    if np.any(bid_sz < 0) or np.any(ask_sz < 0):
        raise MarketDataParseError("Negative quote size", path=path, line=_first_failing((bid_sz < 0) | (ask_sz < 0)))

    k = levels - 1
    bid_depth_px = np.empty((len(ts), k))
    bid_depth_sz = np.empty((len(ts), k))
    ask_depth_px = np.empty((len(ts), k))
    ask_depth_sz = np.empty((len(ts), k))
    for j, level in enumerate(range(2, levels + 1)):
        bid_depth_px[:, j] = _numeric(df, f"bid{level}_px", path)
        bid_depth_sz[:, j] = _numeric(df, f"bid{level}_sz", path)
        ask_depth_px[:, j] = _numeric(df, f"ask{level}_px", path)
        ask_depth_sz[:, j] = _numeric(df, f"ask{level}_sz", path)
    if k and (np.any(bid_depth_sz < 0) or np.any(ask_depth_sz < 0)):
        bad = (bid_depth_sz < 0).any(axis=1) | (ask_depth_sz < 0).any(axis=1)
        raise MarketDataParseError("Negative depth size", path=path, line=_first_failing(bad))

    order = _check_ordering(ts, path, ordering_tolerance_ns)
    keep = (ask_px - bid_px)[order] > 0
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        logger.warning(f"[WARN] {spec.symbol}: dropped {dropped} locked/crossed quotes from {path}")
    idx = order[keep]

    stream = QuoteStream(
        ts[idx], bid_px[idx], bid_sz[idx], ask_px[idx], ask_sz[idx],
        bid_depth_px[idx], bid_depth_sz[idx], ask_depth_px[idx], ask_depth_sz[idx],
        dropped=dropped,
    )
    logger.info(f"[OK] {spec.symbol}: loaded {len(stream)} quotes ({levels} levels) from {path}")
    return stream


def ingest_trades(path: Union[str, Path], spec: InstrumentSpec,
                  ordering_tolerance_ns: int = DEFAULT_ORDERING_TOLERANCE_NS) -> TradeStream:
    """Read a trades CSV (ts_ns,px,sz[,side]) into a time-sorted TradeStream."""
    path = Path(path)
    df = _read_raw(path)
    if df.empty and len(df.columns) == 0:
        return TradeStream.empty()

    columns = [c.strip() for c in df.columns]
    df.columns = columns
    if columns not in (TRADE_BASE_COLUMNS, TRADE_BASE_COLUMNS + ["side"]):
        raise MarketDataParseError(f"Trades header must be ts_ns,px,sz[,side], got {','.join(columns)}",
                                   path=path, line=1)
    if df.empty:
        return TradeStream.empty()

    ts = _numeric(df, "ts_ns", path, dtype=np.int64)
    px = _numeric(df, "px", path)
    sz = _numeric(df, "sz", path)
    if np.any(px <= 0):
        raise MarketDataParseError("Trade price must be positive", path=path, line=_first_failing(px <= 0))
    if np.any(sz <= 0):
        raise MarketDataParseError("Trade size must be positive", path=path, line=_first_failing(sz <= 0))

    side = np.zeros(len(ts), dtype=np.int8)
    if "side" in columns:
        codes = df["side"].str.strip().str.upper()
        unknown = ~codes.isin(list(SIDE_CODES)).to_numpy()
        if unknown.any():
            row = int(np.flatnonzero(unknown)[0])
            raise MarketDataParseError(f"Unknown trade side '{df['side'].iloc[row]}' (expected B, S or U)",
                                       path=path, line=row + _FIRST_DATA_LINE)
        side = codes.map(lambda c: SIDE_INT[SIDE_CODES[c]]).to_numpy(dtype=np.int8)

    order = _check_ordering(ts, path, ordering_tolerance_ns)
    stream = TradeStream(ts[order], px[order], sz[order], side[order])
    logger.info(f"[OK] {spec.symbol}: loaded {len(stream)} trades from {path}")
    return stream
