from datetime import date
from pathlib import Path

import pytest

from src.marketdata.models import NS_PER_SECOND, InstrumentSpec
from src.simulator.config import SimConfig

SESSION_DAY = date(2016, 10, 3)


@pytest.fixture(autouse=True)
def console_only_logging(monkeypatch):
    monkeypatch.setenv("TICKVOL_LOG_FILE", "")


@pytest.fixture
def spec() -> InstrumentSpec:
    """One-hour session, cent ticks."""
    return InstrumentSpec(symbol="TEST", tick_size=0.01, session_open="08:00:00", session_close="09:00:00")


@pytest.fixture
def at(spec):
    """Seconds after the session open on SESSION_DAY -> ns since epoch."""
    open_ns, _ = spec.session_bounds_ns(SESSION_DAY)

    def to_ns(seconds: float, day_offset: int = 0) -> int:
        return open_ns + day_offset * 86_400 * NS_PER_SECOND + int(round(seconds * NS_PER_SECOND))

    return to_ns


@pytest.fixture
def write_file(tmp_path):
    def write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.fixture
def small_sim() -> SimConfig:
    """Two one-hour sessions, quick to generate."""
    return SimConfig(seed=11, session_length=3600.0, n_days=2, trade_rate=0.2)
