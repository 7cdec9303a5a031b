import logging
from pathlib import Path

import numpy as np

from src.simulator.config import SimConfig
from src.simulator.market import calibrate_equilibrium, generate_market

from .base import BaseService

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class SimulateService(BaseService):
    def universe(self) -> list[tuple[SimConfig, str]]:
        """Per-instrument configs and group labels derived from the run seed."""
        base = self.config.simulate.with_updates(seed=self.config.run_seed)
        options = self.config.simulate_options
        k = options.instruments
        if k == 1:
            configs = [base]
        else:
            seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(base.seed).spawn(k)]
            configs = [
                base.with_updates(
                    symbol=f"{base.symbol}{j + 1:02d}",
                    seed=seeds[j],
                    book_depth_per_level=base.book_depth_per_level * options.book_depth_spread ** (j / (k - 1)),
                    true_sigma=base.true_sigma * options.sigma_spread ** (j / (k - 1)),
                )
                for j in range(k)
            ]
        if options.equilibrium:
            configs = [calibrate_equilibrium(c) for c in configs]
        groups = options.groups or ("",)
        return [(c, groups[j % len(groups)]) for j, c in enumerate(configs)]

    def run(self, staging: Path) -> list[Path]:
        entries, written = [], []
        for config, group in self.universe():
            market = generate_market(config, staging)
            written += [market.quotes_path, market.trades_path, market.instrument_path]
            entries.append({
                "symbol": config.symbol,
                "group": group,
                "quotes": market.quotes_path.name,
                "trades": market.trades_path.name,
                "instrument": market.instrument_path.name,
                "n_quotes": market.n_quotes,
                "n_trades": market.n_trades,
                "config": config.to_dict(),
            })
        manifest = {
            "equilibrium": self.config.simulate_options.equilibrium,
            "seed": self.config.run_seed,
            "instruments": entries,
        }
        written.append(self.write_json(manifest, staging / MANIFEST_NAME))
        logger.info(f"[SIM] Simulated {len(entries)} instrument(s)")
        return written
