import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from src.baselines.evaluation import ForecastEval, mse_compare, xi_grid, xi_histogram
from src.baselines.garch import rolling_garch_forecast
from src.baselines.realized import daily_close_returns, realized_by_session, sampled_return_series
from src.errors import DomainError
from src.estimators.formulas import instantaneous_volatility
from src.marketdata.aggregate import aggregate_windows, daily_aggregates
from src.marketdata.models import InstrumentSpec, QuoteStream, TradeStream

from .base import BaseService

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["symbol", "date", "sigma_realized", "sigma_inst", "sigma_inst_lagged", "sigma_garch"]


def _sigma_or_nan(agg, spec: InstrumentSpec) -> float:
    try:
        return instantaneous_volatility(agg, spec)
    except DomainError:
        return math.nan


class ForecastService(BaseService):
    def daily_comparison(self, spec: InstrumentSpec, quotes: QuoteStream, trades: TradeStream) -> pd.DataFrame:
        """
        Per-day realized volatility next to the same-day σ_I, the previous day's σ_I and
        the one-day-ahead GARCH volatility, all in per-session units.
        """
        realized = realized_by_session(sampled_return_series(quotes, spec, self.config.forecast.realized_interval))
        days = daily_aggregates(quotes, trades, spec)
        inst = pd.Series({d.session_date: _sigma_or_nan(d, spec) for d in days}, name="sigma_inst")
        garch = rolling_garch_forecast(daily_close_returns(trades, spec), self.config.forecast.min_history)

        frame = pd.concat([realized, inst, inst.shift(1).rename("sigma_inst_lagged"),
                           garch["sigma"].rename("sigma_garch")], axis=1, join="inner")
        frame = frame.dropna().sort_index()
        frame.index.name = "date"
        frame = frame.reset_index()
        frame.insert(0, "symbol", spec.symbol)
        return frame[COMPARISON_COLUMNS]

    def _exclusions(self, dates: pd.Series) -> list[int]:
        excluded = set(self.config.forecast.exclude_dates)
        return [i for i, d in enumerate(dates) if d in excluded]

    def run(self, staging: Path) -> list[Path]:
        options = self.config.forecast
        comparisons, summary, grids, xi_samples = [], {}, [], []
        minute = replace(self.config.aggregation, window=60.0, sub_intervals=1)
        for source in self.config.data:
            spec, quotes, trades = self.load_market(source)
            frame = self.daily_comparison(spec, quotes, trades)
            exclusions = self._exclusions(frame["date"])

            table, cells = xi_grid(aggregate_windows(quotes, trades, spec, minute), spec,
                                   options.histories, options.forecasts)
            table.insert(0, "symbol", spec.symbol)
            grids.append(table)
            cell = cells.get(tuple(options.histogram_cell))
            xi = cell.xi if cell is not None else np.empty(0)
            xi_samples.append(xi)

            evaluation = ForecastEval(
                mse_inst=mse_compare(frame["sigma_realized"], frame["sigma_inst"], exclusions),
                mse_garch=mse_compare(frame["sigma_realized"], frame["sigma_garch"], exclusions),
                n_days=int(len(frame) - len(exclusions)),
                xi=xi,
            )
            summary[spec.symbol] = {
                **evaluation.to_dict(),
                "mse_inst_lagged": mse_compare(frame["sigma_realized"], frame["sigma_inst_lagged"], exclusions),
                "excluded_dates": [frame["date"].iloc[i] for i in exclusions],
            }
            comparisons.append(frame)
            logger.info(f"[OK] {spec.symbol}: MSE sigma_I {evaluation.mse_inst:.3e}, GARCH {evaluation.mse_garch:.3e}")

        histogram = xi_histogram(np.concatenate(xi_samples), bins=options.bins)
        return [
            self.write_table(pd.concat(comparisons, ignore_index=True), staging, "daily_comparison"),
            self.write_json(summary, staging / "mse_summary.json"),
            self.write_table(pd.concat(grids, ignore_index=True), staging, "xi_grid"),
            self.write_table(histogram, staging, "xi_histogram"),
        ]
