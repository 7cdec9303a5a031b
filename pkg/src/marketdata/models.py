"""
Market data model
- Static instrument metadata
- Quote/trade events and the column stores that hold them
- Per-window aggregates consumed by the estimators
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, fields
from datetime import date, datetime, time, timezone
from pathlib import Path
from typing import Literal, Optional, Union, overload

import numpy as np

from src.errors import ConfigurationError

NS_PER_SECOND = 1_000_000_000
MAX_DEPTH_LEVELS = 5

Side = Literal["buy", "sell", "unknown"]
SIDE_CODES = {"B": "buy", "S": "sell", "U": "unknown"}
SIDE_TO_CODE = {v: k for k, v in SIDE_CODES.items()}
# Integer encoding used inside TradeStream.side
SIDE_INT = {"buy": 1, "sell": -1, "unknown": 0}
INT_SIDE = {v: k for k, v in SIDE_INT.items()}


def _parse_time(value: Union[str, time]) -> time:
    if isinstance(value, time):
        return value
    try:
        return time.fromisoformat(str(value))
    except ValueError as e:
        raise ConfigurationError(f"Invalid session time '{value}': {e}") from e


@dataclass(frozen=True)
class InstrumentSpec:
    """Static instrument metadata. Session bounds are UTC times of day."""

    symbol: str
    tick_size: float
    session_open: time
    session_close: time
    price_decimals: int = 2

    def __post_init__(self):
        object.__setattr__(self, "session_open", _parse_time(self.session_open))
        object.__setattr__(self, "session_close", _parse_time(self.session_close))
        if not self.symbol:
            raise ConfigurationError("Instrument symbol must not be empty")
        if not self.tick_size > 0:
            raise ConfigurationError(f"tick_size must be positive, got {self.tick_size}")
        if not self.session_open < self.session_close:
            raise ConfigurationError(
                f"session_open {self.session_open} must precede session_close {self.session_close}"
            )
        if self.price_decimals < 0:
            raise ConfigurationError(f"price_decimals must be non-negative, got {self.price_decimals}")

    @property
    def session_seconds(self) -> float:
        open_s = self.session_open.hour * 3600 + self.session_open.minute * 60 + self.session_open.second
        close_s = self.session_close.hour * 3600 + self.session_close.minute * 60 + self.session_close.second
        return float(close_s - open_s) + (self.session_close.microsecond - self.session_open.microsecond) / 1e6

    def session_bounds_ns(self, day: date) -> tuple[int, int]:
        """Return the [open, close) bounds of the session on ``day`` in ns since epoch."""
        open_dt = datetime.combine(day, self.session_open, tzinfo=timezone.utc)
        close_dt = datetime.combine(day, self.session_close, tzinfo=timezone.utc)
        return _to_ns(open_dt), _to_ns(close_dt)

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "tick_size": self.tick_size,
            "session_open": self.session_open.isoformat(),
            "session_close": self.session_close.isoformat(),
            "price_decimals": self.price_decimals,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "InstrumentSpec":
        missing = {"symbol", "tick_size", "session_open", "session_close"} - set(data)
        if missing:
            raise ConfigurationError(f"Instrument spec is missing fields: {sorted(missing)}")
        return cls(
            symbol=str(data["symbol"]),
            tick_size=float(data["tick_size"]),
            session_open=data["session_open"],
            session_close=data["session_close"],
            price_decimals=int(data.get("price_decimals", 2)),
        )


def _to_ns(dt: datetime) -> int:
    delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
    return (delta.days * 86_400 + delta.seconds) * NS_PER_SECOND + delta.microseconds * 1_000


def load_instrument_spec(path: Union[str, Path]) -> InstrumentSpec:
    """Read an instrument spec JSON document."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigurationError(f"Instrument spec not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Instrument spec {path} is not valid JSON: {e}") from e
    return InstrumentSpec.from_dict(data)


@dataclass(frozen=True)
class QuoteEvent:
    ts: int
    bid_px: float
    bid_sz: float
    ask_px: float
    ask_sz: float
    # Levels 2..5 as ((px, sz), ...) per side; empty when the feed is top-of-book only
    bid_depth: tuple[tuple[float, float], ...] = ()
    ask_depth: tuple[tuple[float, float], ...] = ()

    @property
    def spread(self) -> float:
        return self.ask_px - self.bid_px

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid_px + self.ask_px)


@dataclass(frozen=True)
class TradeEvent:
    ts: int
    px: float
    sz: float
    side: Side = "unknown"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuoteStream(Sequence):
    """
    Column store of time-sorted quote events.

    ``bid_depth_px`` etc. have shape (n, k) with k depth levels beyond the touch
    (0 when the file carries top-of-book only).
    """

    ts: np.ndarray
    bid_px: np.ndarray
    bid_sz: np.ndarray
    ask_px: np.ndarray
    ask_sz: np.ndarray
    bid_depth_px: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    bid_depth_sz: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    ask_depth_px: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    ask_depth_sz: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    dropped: int = 0

    def __post_init__(self):
        n = len(self.ts)
        object.__setattr__(self, "ts", _readonly(np.asarray(self.ts, dtype=np.int64)))
        for name in ("bid_px", "bid_sz", "ask_px", "ask_sz"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=np.float64)))
        for name in ("bid_depth_px", "bid_depth_sz", "ask_depth_px", "ask_depth_sz"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.size == 0:
                arr = np.empty((n, 0))
            object.__setattr__(self, name, _readonly(arr))

    @classmethod
    def empty(cls, dropped: int = 0) -> "QuoteStream":
        z = np.empty(0)
        return cls(np.empty(0, dtype=np.int64), z, z, z, z, dropped=dropped)

    @property
    def depth_levels(self) -> int:
        """Number of book levels available per side, touch included."""
        return 1 + self.bid_depth_px.shape[1]

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.bid_px + self.ask_px)

    @property
    def spread(self) -> np.ndarray:
        return self.ask_px - self.bid_px

    def book_volumes(self, levels: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Average displayed size over the first ``levels`` levels of each side."""
        if levels < 1 or levels > self.depth_levels:
            raise ConfigurationError(
                f"Requested {levels} book levels but the stream carries {self.depth_levels}"
            )
        if levels == 1:
            return self.bid_sz, self.ask_sz
        k = levels - 1
        bid = (self.bid_sz + self.bid_depth_sz[:, :k].sum(axis=1)) / levels
        ask = (self.ask_sz + self.ask_depth_sz[:, :k].sum(axis=1)) / levels
        return bid, ask

    def subset(self, start: int, stop: int) -> "QuoteStream":
        return QuoteStream(
            self.ts[start:stop], self.bid_px[start:stop], self.bid_sz[start:stop],
            self.ask_px[start:stop], self.ask_sz[start:stop],
            self.bid_depth_px[start:stop], self.bid_depth_sz[start:stop],
            self.ask_depth_px[start:stop], self.ask_depth_sz[start:stop],
        )

    def __len__(self) -> int:
        return len(self.ts)

    @overload
    def __getitem__(self, i: int) -> QuoteEvent: ...

    @overload
    def __getitem__(self, i: slice) -> "QuoteStream": ...

    def __getitem__(self, i):
        if isinstance(i, slice):
            start, stop, step = i.indices(len(self))
            if step != 1:
                raise ValueError("QuoteStream slices must be contiguous")
            return self.subset(start, stop)
        k = self.bid_depth_px.shape[1]
        return QuoteEvent(
            ts=int(self.ts[i]),
            bid_px=float(self.bid_px[i]), bid_sz=float(self.bid_sz[i]),
            ask_px=float(self.ask_px[i]), ask_sz=float(self.ask_sz[i]),
            bid_depth=tuple((float(self.bid_depth_px[i, j]), float(self.bid_depth_sz[i, j])) for j in range(k)),
            ask_depth=tuple((float(self.ask_depth_px[i, j]), float(self.ask_depth_sz[i, j])) for j in range(k)),
        )


@dataclass(frozen=True, eq=False)
class TradeStream(Sequence):
    """Column store of time-sorted trades; ``side`` uses +1 buy, -1 sell, 0 unknown."""

    ts: np.ndarray
    px: np.ndarray
    sz: np.ndarray
    side: Optional[np.ndarray] = None
    dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ts", _readonly(np.asarray(self.ts, dtype=np.int64)))
        object.__setattr__(self, "px", _readonly(np.asarray(self.px, dtype=np.float64)))
        object.__setattr__(self, "sz", _readonly(np.asarray(self.sz, dtype=np.float64)))
        side = np.zeros(len(self.ts), dtype=np.int8) if self.side is None else np.asarray(self.side, dtype=np.int8)
        object.__setattr__(self, "side", _readonly(side))

    @classmethod
    def empty(cls) -> "TradeStream":
        return cls(np.empty(0, dtype=np.int64), np.empty(0), np.empty(0))

    @property
    def has_sides(self) -> bool:
        return bool(np.any(self.side != 0))

    def subset(self, start: int, stop: int) -> "TradeStream":
        return TradeStream(self.ts[start:stop], self.px[start:stop], self.sz[start:stop], self.side[start:stop])

    def __len__(self) -> int:
        return len(self.ts)

    def __getitem__(self, i):
        if isinstance(i, slice):
            start, stop, step = i.indices(len(self))
            if step != 1:
                raise ValueError("TradeStream slices must be contiguous")
            return self.subset(start, stop)
        return TradeEvent(ts=int(self.ts[i]), px=float(self.px[i]), sz=float(self.sz[i]),
                          side=INT_SIDE[int(self.side[i])])


@dataclass(frozen=True)
class WindowAggregate:
    """
    Per-window averages of the prevailing quote state and the window's trading.

    ``window_start``/``window_end`` are ns since epoch; ``open_price``/``close_price``
    are the prevailing prices at the window edges (NaN when no quote state exists yet).
    """

    window_start: int
    window_end: int
    avg_spread: float
    avg_bid_vol: float
    avg_ask_vol: float
    avg_price: float
    traded_volume: float
    price_std: float
    n_quotes: int
    n_trades: int
    valid: bool
    session_date: str = ""
    truncated: bool = False
    open_price: float = float("nan")
    close_price: float = float("nan")

    @property
    def duration(self) -> float:
        """ΔT in seconds."""
        return (self.window_end - self.window_start) / NS_PER_SECOND

    @property
    def book_volume(self) -> float:
        return self.avg_bid_vol + self.avg_ask_vol

    def to_dict(self) -> dict:
        return asdict(self)


AGGREGATE_COLUMNS = [f.name for f in fields(WindowAggregate)]
