from .evaluation import ForecastEval, XiCell, mse_compare, xi_evaluation, xi_grid, xi_histogram, xi_pairs
from .garch import (
    GarchModel,
    fit_garch11,
    garch_conditional_variance,
    garch_forecast_one_step,
    rolling_garch_forecast,
)
from .realized import (
    ReturnSeries,
    build_return_series,
    daily_close_returns,
    realized_by_session,
    realized_volatility,
    sampled_return_series,
)

__all__ = [
    "ForecastEval",
    "GarchModel",
    "ReturnSeries",
    "XiCell",
    "build_return_series",
    "daily_close_returns",
    "fit_garch11",
    "garch_conditional_variance",
    "garch_forecast_one_step",
    "mse_compare",
    "realized_by_session",
    "realized_volatility",
    "rolling_garch_forecast",
    "sampled_return_series",
    "xi_evaluation",
    "xi_grid",
    "xi_histogram",
    "xi_pairs",
]
