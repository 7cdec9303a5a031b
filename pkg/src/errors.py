"""Exception hierarchy shared by every tickvol package."""

from __future__ import annotations

from pathlib import Path
from typing import Optional


class TickVolError(Exception):
    """Base class for all errors raised by tickvol."""


class ConfigurationError(TickVolError, ValueError):
    """Invalid instrument, aggregation, simulation or run configuration."""


class MarketDataParseError(TickVolError, ValueError):
    """A quotes/trades file row could not be parsed or violates the schema."""

    def __init__(self, message: str, path: Optional[Path] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class OrderingError(MarketDataParseError):
    """Timestamps regress by more than the configured tolerance."""


class DomainError(TickVolError, ValueError):
    """An argument lies outside the mathematical domain of an estimator."""


class UndefinedTimeError(DomainError):
    """A characteristic time (T_Price / T_Volume) is undefined for the window."""


class UndefinedGammaError(DomainError):
    """The invariant cannot be evaluated because a characteristic time is undefined."""


class UndefinedVolatilityError(DomainError):
    """The instantaneous volatility cannot be evaluated (empty book)."""


class SimulationError(TickVolError):
    """Synthetic market generation or fill simulation failed."""


class StatisticalTestError(TickVolError, ValueError):
    """A statistical test cannot be run on the given sample."""


class EmptyReportError(TickVolError):
    """Every instrument or day was removed by the report filters."""


class InsufficientHistoryError(TickVolError, ValueError):
    """Not enough observations to fit or evaluate a model."""


class LengthMismatchError(TickVolError, ValueError):
    """Two series that must be aligned have different lengths."""


class GarchConvergenceError(TickVolError):
    """The GARCH optimizer stopped without meeting the convergence criterion.

    Args:
        message: Diagnostic from the optimizer.
        best_params: Best (omega, alpha, beta) reached before stopping.
        loglik: Log-likelihood at ``best_params``.
    """

    def __init__(self, message: str, best_params: tuple[float, float, float], loglik: float):
        self.best_params = best_params
        self.loglik = loglik
        super().__init__(f"{message} (best so far: omega={best_params[0]:.3e}, "
                         f"alpha={best_params[1]:.4f}, beta={best_params[2]:.4f}, loglik={loglik:.4f})")
