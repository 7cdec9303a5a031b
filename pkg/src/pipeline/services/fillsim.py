import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.errors import ConfigurationError
from src.estimators.formulas import correction_curve
from src.simulator.fills import FillSimResult, fill_results_frame, simulate_passive_fills
from src.simulator.market import simulate_streams

from .base import BaseService

logger = logging.getLogger(__name__)


class FillSimService(BaseService):
    def _from_data(self, policy) -> list[FillSimResult]:
        results = []
        for source in self.config.data:
            spec, quotes, trades = self.load_market(source)
            results += simulate_passive_fills(quotes, trades, spec, policy)
        return results

    def _from_sweep(self, policy) -> list[FillSimResult]:
        """One in-memory simulated market per configured spread."""
        base = self.config.simulate.with_updates(seed=self.config.run_seed)
        seeds = np.random.SeedSequence(base.seed).spawn(len(self.config.fillsim.spread_ticks))
        results = []
        for n, child in zip(self.config.fillsim.spread_ticks, seeds):
            config = base.with_updates(symbol=f"{base.symbol}_N{n}", spread_ticks=n,
                                       seed=int(child.generate_state(1)[0]))
            quotes, trades, spec = simulate_streams(config)
            results += simulate_passive_fills(quotes, trades, spec, policy)
        return results

    def run(self, staging: Path) -> list[Path]:
        policy = self.config.fillsim.horizon_policy
        if self.config.data:
            results = self._from_data(policy)
        elif self.config.fillsim.spread_ticks:
            results = self._from_sweep(policy)
        else:
            raise ConfigurationError("fillsim needs a 'data' section or fillsim.spread_ticks to simulate")
        options = self.config.fillsim
        grid = np.linspace(1.0, options.curve_max, options.curve_points)
        curve = pd.DataFrame({"spread_ticks": grid, "correction": correction_curve(grid)})
        return [
            self.write_table(fill_results_frame(results), staging, "fillsim"),
            self.write_table(curve, staging, "correction_curve"),
        ]
