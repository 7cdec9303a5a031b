from .aggregate import AggregationConfig, aggregate_windows, daily_aggregates, group_by_session, merge_windows
from .ingest import ingest_quotes, ingest_trades
from .io import aggregates_frame, write_aggregates, write_quotes, write_trades
from .models import (
    InstrumentSpec,
    QuoteEvent,
    QuoteStream,
    TradeEvent,
    TradeStream,
    WindowAggregate,
    load_instrument_spec,
)

__all__ = [
    "AggregationConfig",
    "InstrumentSpec",
    "QuoteEvent",
    "QuoteStream",
    "TradeEvent",
    "TradeStream",
    "WindowAggregate",
    "aggregate_windows",
    "aggregates_frame",
    "daily_aggregates",
    "group_by_session",
    "ingest_quotes",
    "ingest_trades",
    "load_instrument_spec",
    "merge_windows",
    "write_aggregates",
    "write_quotes",
    "write_trades",
]
