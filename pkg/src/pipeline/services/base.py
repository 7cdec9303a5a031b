import json
import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import pandas as pd

from src.marketdata.ingest import ingest_quotes, ingest_trades
from src.marketdata.models import InstrumentSpec, QuoteStream, TradeStream, load_instrument_spec
from src.pipeline.config import DataSource, RunConfig

if TYPE_CHECKING:
    from src.pipeline.runner import PipelineRunner

logger = logging.getLogger(__name__)


class BaseService:
    def __init__(self, config: RunConfig, manager: Optional["PipelineRunner"] = None):
        self.config = config
        self.manager = manager

    def load_market(self, source: DataSource) -> tuple[InstrumentSpec, QuoteStream, TradeStream]:
        """Read one instrument's spec, quotes and trades."""
        spec = load_instrument_spec(source.instrument)
        quotes = ingest_quotes(source.quotes, spec)
        trades = ingest_trades(source.trades, spec)
        return spec, quotes, trades

    def write_table(self, frame: pd.DataFrame, staging: Path, stem: str) -> Path:
        """Write ``frame`` as ``<stem>.csv`` or ``<stem>.json`` depending on the run format."""
        path = staging / f"{stem}.{self.config.format}"
        if self.config.format == "json":
            path.write_text(frame.to_json(orient="records", indent=2, double_precision=15) + "\n", encoding="utf-8")
        else:
            frame.to_csv(path, index=False, lineterminator="\n")
        return path

    @staticmethod
    def write_json(data: dict, path: Path) -> Path:
        path.write_text(json.dumps(_finite_or_null(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _finite_or_null(value):
    # NaN/inf are not valid JSON
    if isinstance(value, dict):
        return {k: _finite_or_null(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_null(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
