"""
Run configuration
- One JSON document per run, one section per command
- CLI flags (--out, --seed, --format, --window) override the document
"""

import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal, Optional, Union

from src.errors import ConfigurationError
from src.estimators.formulas import AnnualizationCalendar
from src.marketdata.aggregate import AggregationConfig
from src.simulator.config import SimConfig
from src.simulator.fills import HorizonPolicy
from src.statstests.normality import DEFAULT_MC_REPLICATES
from src.statstests.report import DAY_VOLUME_FRACTION, LIQUID_T_PRICE_LIMIT

logger = logging.getLogger(__name__)

OutputFormat = Literal["csv", "json"]


def _build(cls, data: Optional[dict], section: str):
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config section '{section}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"Unknown keys in '{section}': {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigurationError(f"Invalid '{section}' section: {e}") from e


@dataclass(frozen=True)
class DataSource:
    """One instrument's input files."""

    quotes: Path
    trades: Path
    instrument: Path
    group: str = ""

    @classmethod
    def from_dict(cls, data: dict, base: Path) -> "DataSource":
        missing = {"quotes", "trades", "instrument"} - set(data)
        if missing:
            raise ConfigurationError(f"Data source is missing {sorted(missing)}")
        return cls(
            quotes=base / data["quotes"],
            trades=base / data["trades"],
            instrument=base / data["instrument"],
            group=str(data.get("group", "")),
        )

    def missing_paths(self) -> list[Path]:
        return [p for p in (self.quotes, self.trades, self.instrument) if not p.exists()]


@dataclass(frozen=True)
class SimulateOptions:
    """
    Args:
        equilibrium: calibrate each instrument's trade rate so that γ = 1
        instruments: number of instruments in the simulated universe
        book_depth_spread: ratio between the deepest and the shallowest book in the
            universe (instrument depths are spaced geometrically)
        sigma_spread: ratio between the most and the least volatile instrument (true_sigma
            spaced geometrically upward from the base value)
        groups: group labels assigned round-robin to the instruments
    """

    equilibrium: bool = False
    instruments: int = 1
    book_depth_spread: float = 1.0
    sigma_spread: float = 1.0
    groups: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.instruments < 1:
            raise ConfigurationError(f"instruments must be >= 1, got {self.instruments}")
        if not self.book_depth_spread >= 1:
            raise ConfigurationError(f"book_depth_spread must be >= 1, got {self.book_depth_spread}")
        if not self.sigma_spread >= 1:
            raise ConfigurationError(f"sigma_spread must be >= 1, got {self.sigma_spread}")


@dataclass(frozen=True)
class InvariantOptions:
    mode: Literal["per_instrument", "exchange"] = "per_instrument"
    t_price_limit: float = LIQUID_T_PRICE_LIMIT
    volume_fraction: float = DAY_VOLUME_FRACTION
    ks_replicates: int = DEFAULT_MC_REPLICATES

    def __post_init__(self):
        if self.mode not in ("per_instrument", "exchange"):
            raise ConfigurationError(f"invariant.mode must be per_instrument or exchange, got {self.mode!r}")
        if not 0 <= self.volume_fraction <= 1:
            raise ConfigurationError(f"volume_fraction must be in [0, 1], got {self.volume_fraction}")


@dataclass(frozen=True)
class FillSimOptions:
    """
    Args:
        horizon: HorizonPolicy fields
        spread_ticks: when set and no data is configured, simulate one market per spread
        curve_max: largest n of the sampled correction curve
        curve_points: samples on the correction curve
    """

    horizon: dict = field(default_factory=dict)
    spread_ticks: tuple[int, ...] = ()
    curve_max: float = 20.0
    curve_points: int = 191

    def __post_init__(self):
        object.__setattr__(self, "spread_ticks", tuple(int(n) for n in self.spread_ticks))
        if self.curve_max < 1 or self.curve_points < 2:
            raise ConfigurationError("correction curve needs curve_max >= 1 and at least two points")

    @property
    def horizon_policy(self) -> HorizonPolicy:
        return _build(HorizonPolicy, self.horizon, "fillsim.horizon")


@dataclass(frozen=True)
class ForecastOptions:
    """
    Args:
        min_history: daily returns before the first GARCH forecast
        realized_interval: sampling step of the mid returns behind the daily realized
            volatility, seconds
        exclude_dates: session dates left out of the MSE (outlier days)
        histories: history intervals of the ξ grid, minutes
        forecasts: forecast intervals of the ξ grid, minutes
        histogram_cell: (history, forecast) cell whose ξ sample is histogrammed
        bins: histogram bins
    """

    min_history: int = 100
    realized_interval: float = 5.0
    exclude_dates: tuple[str, ...] = ()
    histories: tuple[int, ...] = (1, 5, 10, 30, 60)
    forecasts: tuple[int, ...] = (1, 5, 10, 30, 60)
    histogram_cell: tuple[int, int] = (5, 5)
    bins: int = 50

    def __post_init__(self):
        for name in ("exclude_dates", "histories", "forecasts", "histogram_cell"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.histogram_cell) != 2:
            raise ConfigurationError("histogram_cell must be [history, forecast]")
        if self.bins < 1:
            raise ConfigurationError(f"bins must be >= 1, got {self.bins}")
        if not self.realized_interval > 0:
            raise ConfigurationError(f"realized_interval must be positive, got {self.realized_interval}")


@dataclass(frozen=True)
class RunConfig:
    out: Path = Path("out")
    format: OutputFormat = "csv"
    seed: Optional[int] = None
    window: float = 300.0
    simulate: SimConfig = field(default_factory=SimConfig)
    simulate_options: SimulateOptions = field(default_factory=SimulateOptions)
    data: tuple[DataSource, ...] = ()
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    calendar: Optional[AnnualizationCalendar] = None
    invariant: InvariantOptions = field(default_factory=InvariantOptions)
    fillsim: FillSimOptions = field(default_factory=FillSimOptions)
    forecast: ForecastOptions = field(default_factory=ForecastOptions)

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "RunConfig":
        allowed = {"out", "format", "seed", "window", "simulate", "data", "aggregation", "calendar",
                   "invariant", "fillsim", "forecast"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"Unknown config sections: {sorted(unknown)}")

        sim_data = dict(data.get("simulate") or {})
        option_keys = {f.name for f in fields(SimulateOptions)}
        options = {k: sim_data.pop(k) for k in list(sim_data) if k in option_keys}
        window = float(data.get("window", 300.0))
        aggregation = dict(data.get("aggregation") or {})
        aggregation.setdefault("window", window)

        return cls(
            out=base / data.get("out", "out"),
            format=data.get("format", "csv"),
            seed=data.get("seed"),
            window=window,
            simulate=_build(SimConfig, sim_data, "simulate"),
            simulate_options=_build(SimulateOptions, options, "simulate"),
            data=_data_sources(data.get("data"), base),
            aggregation=_build(AggregationConfig, aggregation, "aggregation"),
            calendar=_build(AnnualizationCalendar, data["calendar"], "calendar") if data.get("calendar") else None,
            invariant=_build(InvariantOptions, data.get("invariant"), "invariant"),
            fillsim=_build(FillSimOptions, data.get("fillsim"), "fillsim"),
            forecast=_build(ForecastOptions, data.get("forecast"), "forecast"),
        )

    @classmethod
    def load(cls, path: Union[str, Path, None]) -> "RunConfig":
        if path is None:
            return cls()
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigurationError(f"Config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")
        return cls.from_dict(data, base=path.parent)

    def with_overrides(self, out: Optional[str] = None, seed: Optional[int] = None,
                       fmt: Optional[str] = None, window: Optional[float] = None) -> "RunConfig":
        """Apply command-line flags on top of the JSON document."""
        changes: dict[str, Any] = {}
        if out is not None:
            changes["out"] = Path(out)
        if fmt is not None:
            changes["format"] = fmt
        if seed is not None:
            changes["seed"] = seed
        if window is not None:
            changes["window"] = float(window)
            changes["aggregation"] = replace(self.aggregation, window=float(window))
        config = replace(self, **changes)
        if config.seed is not None and config.seed != config.simulate.seed:
            config = replace(config, simulate=config.simulate.with_updates(seed=config.seed))
        return config

    def validate_inputs(self) -> None:
        """Fail before any work starts when a configured input file is missing."""
        missing = [str(p) for source in self.data for p in source.missing_paths()]
        if missing:
            raise ConfigurationError(f"Input files not found: {', '.join(missing)}")

    @property
    def run_seed(self) -> int:
        return self.simulate.seed if self.seed is None else self.seed


def _data_sources(section: Any, base: Path) -> tuple[DataSource, ...]:
    if not section:
        return ()
    if isinstance(section, dict) and "manifest" in section:
        return load_manifest_sources(base / section["manifest"])
    if isinstance(section, dict) and "instruments" in section:
        section = section["instruments"]
    if not isinstance(section, list):
        raise ConfigurationError("'data' must be a manifest reference or a list of instruments")
    return tuple(DataSource.from_dict(item, base) for item in section)


def load_manifest_sources(path: Union[str, Path]) -> tuple[DataSource, ...]:
    """Data sources listed in a manifest written by the simulate command."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigurationError(f"Manifest not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Manifest {path} is not valid JSON: {e}") from e
    return tuple(DataSource.from_dict(item, path.parent) for item in manifest.get("instruments", []))
