"""
GARCH(1,1) baseline
- Gaussian QMLE with zero mean, fitted on returns rescaled to unit variance
- Variance targeting start (alpha=0.05, beta=0.90), h0 = sample variance
- Expanding-window one-day-ahead forecasts with warm starts
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import optimize, signal

from src.errors import DomainError, GarchConvergenceError, InsufficientHistoryError

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 100
START_ALPHA = 0.05
START_BETA = 0.90
PERSISTENCE_CAP = 1.0 - 1e-6
# stopping tolerance on the total log-likelihood; the optimizer sees the per-observation mean
LOGLIK_TOL = 1e-8
MAX_ITERATIONS = 500
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GarchModel:
    omega: float
    alpha: float
    beta: float
    loglik: float
    h0: float
    n_obs: int = 0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if not self.alpha + self.beta < 1:
            raise DomainError(f"alpha + beta must be below 1, got {self.alpha + self.beta}")

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)

    def to_dict(self) -> dict:
        return asdict(self)


def _variance_path(params: np.ndarray, r2: np.ndarray, h0: float) -> np.ndarray:
    """h_t = ω + α r²_{t-1} + β h_{t-1} for t = 0..n, with h_0 = h0."""
    omega, alpha, beta = params
    drive = omega + alpha * r2
    tail, _ = signal.lfilter([1.0], [1.0, -beta], drive, zi=[beta * h0])
    return np.concatenate([[h0], tail])


def _loglik(params: np.ndarray, r2: np.ndarray, h0: float) -> float:
    h = _variance_path(params, r2[:-1], h0)
    if np.any(~(h > 0)):
        return -np.inf
    return float(-0.5 * np.sum(_LOG_2PI + np.log(h) + r2 / h))


def _scaled(returns: np.ndarray) -> tuple[np.ndarray, float]:
    variance = float(np.var(returns))
    if not variance > 0:
        raise DomainError("Returns have zero variance")
    return returns / math.sqrt(variance), variance


def fit_garch11(returns, start: Optional[GarchModel] = None, max_iter: int = MAX_ITERATIONS) -> GarchModel:
    """
    Fit a zero-mean GARCH(1,1) by Gaussian quasi-maximum likelihood.

    Args:
        returns: daily log returns, oldest first (at least 100)
        start: previous fit used as a warm start instead of variance targeting
        max_iter: optimizer iteration cap

    Returns:
        GarchModel in the units of ``returns``

    Raises:
        InsufficientHistoryError: fewer than 100 finite returns
        GarchConvergenceError: the optimizer stopped before the likelihood settled
    """
    r = np.asarray(returns, dtype=np.float64)
    r = r[np.isfinite(r)]
    if r.size < MIN_OBSERVATIONS:
        raise InsufficientHistoryError(f"GARCH(1,1) needs at least {MIN_OBSERVATIONS} returns, got {r.size}")
    x, variance = _scaled(r)
    r2 = x ** 2
    h0 = 1.0

    if start is None:
        x0 = np.array([1.0 - START_ALPHA - START_BETA, START_ALPHA, START_BETA])
    else:
        x0 = np.array([start.omega / variance, start.alpha, start.beta])
        if x0[1] + x0[2] > 0.999:
            x0[1:] *= 0.999 / (x0[1] + x0[2])

    def objective(params):
        value = _loglik(params, r2, h0)
        return 1e10 if not np.isfinite(value) else -value / r.size

    best = {"params": x0.copy(), "loglik": _loglik(x0, r2, h0)}
    trace = [best["loglik"]]

    def on_iteration(params):
        value = _loglik(params, r2, h0)
        if value > best["loglik"]:
            best.update(params=np.array(params, copy=True), loglik=value)
            trace.append(value)

    result = optimize.minimize(
        objective, x0, method="SLSQP",
        bounds=[(1e-12, None), (0.0, 1.0), (0.0, 1.0)],
        constraints=[{"type": "ineq", "fun": lambda p: PERSISTENCE_CAP - p[1] - p[2]}],
        callback=on_iteration,
        options={"ftol": LOGLIK_TOL / r.size, "maxiter": max_iter},
    )
    final = _loglik(result.x, r2, h0)
    if final >= best["loglik"]:
        best.update(params=np.array(result.x, copy=True), loglik=final)

    omega_s, alpha, beta = (float(v) for v in best["params"])
    # back to return units: variance scales by the sample variance, loglik by the Jacobian
    loglik = best["loglik"] - 0.5 * r.size * math.log(variance)
    params = (omega_s * variance, alpha, beta)
    # status 8: line search cannot improve further, the likelihood has settled
    if not (result.success or result.status == 8):
        raise GarchConvergenceError(f"GARCH(1,1) optimizer stopped: {result.message}", params, loglik)

    model = GarchModel(omega=params[0], alpha=alpha, beta=min(beta, PERSISTENCE_CAP - alpha),
                       loglik=loglik, h0=h0 * variance, n_obs=int(r.size))
    logger.debug(f"[FIT] omega={model.omega:.3e} alpha={model.alpha:.4f} beta={model.beta:.4f} "
                 f"loglik={model.loglik:.3f} ({len(trace)} improving iterations)")
    return model


def garch_forecast_one_step(model: GarchModel, r_t: float, h_t: float) -> float:
    """h_{t+1} = ω + α r_t² + β h_t."""
    if not h_t > 0:
        raise DomainError(f"h_t must be positive, got {h_t}")
    return model.omega + model.alpha * r_t ** 2 + model.beta * h_t


def garch_conditional_variance(model: GarchModel, returns) -> np.ndarray:
    """Conditional variances h_0..h_n; the last entry is the forecast after the final return."""
    r = np.asarray(returns, dtype=np.float64)
    return _variance_path(np.array([model.omega, model.alpha, model.beta]), r ** 2, model.h0)


def rolling_garch_forecast(returns: pd.Series, min_history: int = MIN_OBSERVATIONS) -> pd.DataFrame:
    """
    One-step-ahead variance forecasts from an expanding window refit each day.

    The forecast for row t uses returns strictly before t. A refit that fails to converge
    falls back to its best-so-far parameters, then to the previous day's model.

    Returns:
        DataFrame indexed like ``returns[min_history:]`` with columns variance, sigma, refit_ok
    """
    if min_history < MIN_OBSERVATIONS:
        raise InsufficientHistoryError(f"min_history must be at least {MIN_OBSERVATIONS}")
    if len(returns) <= min_history:
        raise InsufficientHistoryError(
            f"Need more than {min_history} daily returns for rolling GARCH forecasts, got {len(returns)}"
        )
    values = returns.to_numpy(dtype=np.float64)
    model: Optional[GarchModel] = None
    rows = []
    for t in range(min_history, len(values)):
        history = values[:t]
        ok = True
        try:
            model = fit_garch11(history, start=model)
        except GarchConvergenceError as e:
            ok = False
            try:
                omega, alpha, beta = e.best_params
                model = GarchModel(omega, alpha, min(beta, PERSISTENCE_CAP - alpha), e.loglik,
                                   float(np.var(history)), history.size)
                logger.warning(f"[WARN] GARCH refit at {returns.index[t]} did not converge; using best-so-far parameters")
            except DomainError:
                if model is None:
                    raise e
                logger.warning(f"[WARN] GARCH refit at {returns.index[t]} failed; keeping the previous model")
        variance = float(garch_conditional_variance(model, history)[-1])
        rows.append({"variance": variance, "sigma": math.sqrt(variance), "refit_ok": ok})
    return pd.DataFrame(rows, index=returns.index[min_history:])
