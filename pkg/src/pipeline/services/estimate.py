import logging
from pathlib import Path

from src.estimators.formulas import AnnualizationCalendar
from src.estimators.models import estimate_windows, estimates_frame, mean_gamma
from src.marketdata.aggregate import aggregate_windows, daily_aggregates
from src.marketdata.io import write_aggregates

from .base import BaseService

logger = logging.getLogger(__name__)


class EstimateService(BaseService):
    def run(self, staging: Path) -> list[Path]:
        written = []
        for source in self.config.data:
            spec, quotes, trades = self.load_market(source)
            calendar = self.config.calendar or AnnualizationCalendar.for_instrument(spec)
            windows = aggregate_windows(quotes, trades, spec, self.config.aggregation)
            estimates = estimate_windows(windows, spec, calendar)
            days = estimate_windows(daily_aggregates(quotes, trades, spec), spec, calendar)
            written.append(write_aggregates(windows, staging / f"{spec.symbol}.aggregates.csv"))
            written.append(self.write_table(estimates_frame(estimates), staging, f"{spec.symbol}.estimates"))
            written.append(self.write_table(estimates_frame(days), staging, f"{spec.symbol}.daily"))
            logger.info(f"[OK] {spec.symbol}: {len(windows)} windows, daily mean gamma {mean_gamma(days):.4f}")
        return written
