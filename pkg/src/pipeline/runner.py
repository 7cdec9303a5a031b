"""Command dispatch: validate inputs, run the service, promote its outputs atomically."""

import logging
from pathlib import Path

from src.errors import ConfigurationError
from src.utils.atomic import staged_output

from .config import RunConfig
from .services.estimate import EstimateService
from .services.fillsim import FillSimService
from .services.forecast import ForecastService
from .services.invariant import InvariantService
from .services.simulate import SimulateService

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "estimate", "invariant", "fillsim", "forecast-eval")


class PipelineRunner:
    def __init__(self, config: RunConfig):
        self.config = config

        # Initialize Services
        self.simulate_service = SimulateService(config, self)
        self.estimate_service = EstimateService(config, self)
        self.invariant_service = InvariantService(config, self)
        self.fillsim_service = FillSimService(config, self)
        self.forecast_service = ForecastService(config, self)

    def _service(self, command: str):
        services = {
            "simulate": self.simulate_service,
            "estimate": self.estimate_service,
            "invariant": self.invariant_service,
            "fillsim": self.fillsim_service,
            "forecast-eval": self.forecast_service,
        }
        if command not in services:
            raise ConfigurationError(f"Unknown command '{command}' (expected one of {', '.join(COMMANDS)})")
        return services[command]

    def _check_inputs(self, command: str) -> None:
        if command == "simulate":
            return
        if not self.config.data and not (command == "fillsim" and self.config.fillsim.spread_ticks):
            raise ConfigurationError(f"'{command}' needs input instruments in the config 'data' section")
        self.config.validate_inputs()

    def run(self, command: str) -> list[Path]:
        """Run ``command`` and return the output paths after promotion into the out directory."""
        service = self._service(command)
        self._check_inputs(command)
        logger.info(f"[OK] Running '{command}' -> {self.config.out}")
        with staged_output(self.config.out) as staging:
            staged = service.run(staging)
        return [self.config.out / p.relative_to(staging) for p in staged]

    # --- Command Delegates ---
    def simulate(self) -> list[Path]:
        return self.run("simulate")

    def estimate(self) -> list[Path]:
        return self.run("estimate")

    def invariant(self) -> list[Path]:
        return self.run("invariant")

    def fillsim(self) -> list[Path]:
        return self.run("fillsim")

    def forecast_eval(self) -> list[Path]:
        return self.run("forecast-eval")
