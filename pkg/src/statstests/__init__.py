from .normality import TestReport, ks_normality, mean_equals_one_ttest, shapiro_wilk
from .report import (
    CharacteristicTimes,
    GammaSample,
    invariant_report,
    pearson_correlation,
    samples_from_estimates,
)

__all__ = [
    "CharacteristicTimes",
    "GammaSample",
    "TestReport",
    "invariant_report",
    "ks_normality",
    "mean_equals_one_ttest",
    "pearson_correlation",
    "samples_from_estimates",
    "shapiro_wilk",
]
