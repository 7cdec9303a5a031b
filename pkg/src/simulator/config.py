"""Synthetic market configuration."""

import json
from dataclasses import asdict, dataclass, fields, replace
from datetime import date, datetime, time, timedelta
from pathlib import Path
from typing import Optional, Union

from src.errors import ConfigurationError
from src.marketdata.models import InstrumentSpec


@dataclass(frozen=True)
class SimConfig:
    """
    Parameters of the random-walk world the generator draws from.

    Args:
        seed: master seed; every session draws from its own spawned stream
        session_length: seconds per session
        tick_size: price grid step (TS)
        initial_price: starting mid price
        true_sigma: std of the mid over one ``window`` (price units per sqrt(window))
        trade_rate: Poisson trade arrivals per second
        mean_trade_size: mean of the geometric trade-size distribution
        book_depth_per_level: mean displayed size on each book level
        spread_ticks: constant spread n in ticks
        n_days: number of business-day sessions
        window: reference window for ``true_sigma`` (seconds)
        quote_rate: top-of-book size refreshes per second (on top of price moves)
        depth_levels: book levels written per side (touch included)
        print_dispersion: std of a print's distance from its touch, in units of the
            spread's interior width (n-1 ticks)
        shift_day: first session of a volatility regime change (None for none)
        shift_multiplier: σ multiplier from ``shift_day`` on; the trade rate scales by its
            square so the market stays in equilibrium
    """

    seed: int = 7
    symbol: str = "SIM"
    session_length: float = 30600.0
    tick_size: float = 0.01
    initial_price: float = 100.0
    true_sigma: float = 0.02
    trade_rate: float = 0.5
    mean_trade_size: float = 100.0
    book_depth_per_level: float = 1000.0
    spread_ticks: int = 1
    n_days: int = 5
    window: float = 300.0
    quote_rate: float = 0.2
    depth_levels: int = 5
    print_dispersion: float = 0.66
    session_open: str = "08:00:00"
    start_date: str = "2016-10-03"
    price_decimals: int = 2
    shift_day: Optional[int] = None
    shift_multiplier: float = 1.0

    def __post_init__(self):
        positive = ("session_length", "tick_size", "initial_price", "true_sigma", "mean_trade_size",
                    "book_depth_per_level", "window", "shift_multiplier", "print_dispersion")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"SimConfig.{name} must be positive, got {getattr(self, name)}")
        if self.trade_rate < 0 or self.quote_rate < 0:
            raise ConfigurationError("SimConfig rates must be non-negative")
        if self.mean_trade_size < 1:
            raise ConfigurationError(f"mean_trade_size must be >= 1 share, got {self.mean_trade_size}")
        if self.spread_ticks < 1:
            raise ConfigurationError(f"spread_ticks must be >= 1, got {self.spread_ticks}")
        if self.n_days < 1:
            raise ConfigurationError(f"n_days must be >= 1, got {self.n_days}")
        if not 1 <= self.depth_levels <= 5:
            raise ConfigurationError(f"depth_levels must be in 1..5, got {self.depth_levels}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.shift_day is not None and self.shift_day < 0:
            raise ConfigurationError(f"shift_day must be non-negative, got {self.shift_day}")
        open_t = self._open_time()
        open_s = open_t.hour * 3600 + open_t.minute * 60 + open_t.second
        if open_s + self.session_length >= 86_400:
            raise ConfigurationError("Session must end before midnight UTC")
        if self.initial_price <= self.spread_ticks * self.tick_size * self.depth_levels:
            raise ConfigurationError("initial_price is too small for the configured spread and depth")

    def _open_time(self) -> time:
        try:
            return time.fromisoformat(self.session_open)
        except ValueError as e:
            raise ConfigurationError(f"Invalid session_open '{self.session_open}': {e}") from e

    @property
    def spread(self) -> float:
        return self.spread_ticks * self.tick_size

    def sigma_multiplier(self, day_index: int) -> float:
        if self.shift_day is not None and day_index >= self.shift_day:
            return self.shift_multiplier
        return 1.0

    def instrument_spec(self) -> InstrumentSpec:
        open_t = self._open_time()
        close_dt = datetime.combine(date(2000, 1, 1), open_t) + timedelta(seconds=self.session_length)
        return InstrumentSpec(
            symbol=self.symbol,
            tick_size=self.tick_size,
            session_open=open_t,
            session_close=close_dt.time(),
            price_decimals=self.price_decimals,
        )

    def with_updates(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown SimConfig fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "SimConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read SimConfig from {path}: {e}") from e
