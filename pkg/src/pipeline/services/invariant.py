import logging
from pathlib import Path

from src.estimators.models import estimate_windows
from src.marketdata.aggregate import daily_aggregates
from src.statstests.report import invariant_report, samples_from_estimates

from .base import BaseService

logger = logging.getLogger(__name__)


class InvariantService(BaseService):
    def run(self, staging: Path) -> list[Path]:
        samples, times = [], []
        for source in self.config.data:
            spec, quotes, trades = self.load_market(source)
            days = estimate_windows(daily_aggregates(quotes, trades, spec), spec)
            sample, pair = samples_from_estimates(spec.symbol, days, group=source.group)
            samples.append(sample)
            times.append(pair)
        options = self.config.invariant
        table = invariant_report(
            samples, times,
            mode=options.mode,
            t_price_limit=options.t_price_limit,
            volume_fraction=options.volume_fraction,
            n_replicates=options.ks_replicates,
            seed=self.config.run_seed,
        )
        return [self.write_table(table, staging, "invariant_report")]
