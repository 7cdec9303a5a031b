from .formulas import (
    AnnualizationCalendar,
    annualize,
    correction_coefficient,
    correction_curve,
    gamma,
    instantaneous_volatility,
    one_sided_volume,
    passive_fill_probability,
    scale_sigma,
    spread_in_ticks,
    t_price,
    t_volume,
    uncorrected_t_volume,
)
from .models import EstimateSet, estimate_window, estimate_windows, estimates_frame, mean_gamma

__all__ = [
    "AnnualizationCalendar",
    "EstimateSet",
    "annualize",
    "correction_coefficient",
    "correction_curve",
    "estimate_window",
    "estimate_windows",
    "estimates_frame",
    "gamma",
    "instantaneous_volatility",
    "mean_gamma",
    "one_sided_volume",
    "passive_fill_probability",
    "scale_sigma",
    "spread_in_ticks",
    "t_price",
    "t_volume",
    "uncorrected_t_volume",
]
