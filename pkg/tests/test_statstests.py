import math

import numpy as np
import pytest
from scipy import stats

from src.errors import ConfigurationError, EmptyReportError, StatisticalTestError
from src.estimators.models import estimate_windows
from src.marketdata import InstrumentSpec
from src.statstests import (
    CharacteristicTimes,
    GammaSample,
    invariant_report,
    ks_normality,
    mean_equals_one_ttest,
    pearson_correlation,
    samples_from_estimates,
    shapiro_wilk,
)
from src.statstests.report import EXCHANGE_COLUMNS, PER_INSTRUMENT_COLUMNS

from .helpers import window


def normal_quantiles(n: int) -> np.ndarray:
    return stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)


class TestShapiroWilk:
    def test_normal_quantiles_are_not_rejected(self):
        report = shapiro_wilk(normal_quantiles(50))
        assert report.p_value > 0.05
        assert not report.reject_at_005
        assert report.method == "shapiro_wilk"
        assert report.n == 50

    def test_exponential_is_rejected(self):
        sample = np.random.default_rng(4).exponential(size=500)
        assert shapiro_wilk(sample).reject_at_005

    @pytest.mark.parametrize("sample", [[1.0, 2.0], [1.0, 1.0, 1.0, 1.0], [1.0, np.nan, 2.0, 3.0]])
    def test_unusable_samples(self, sample):
        with pytest.raises(StatisticalTestError):
            shapiro_wilk(sample)

    def test_too_long(self):
        with pytest.raises(StatisticalTestError):
            shapiro_wilk(np.arange(5001.0))


class TestKolmogorovSmirnov:
    def test_fixed_params_matches_scipy(self):
        sample = np.random.default_rng(2).normal(size=80)
        report = ks_normality(sample, mode="fixed_params")
        expected = stats.kstest(sample, "norm")
        assert report.statistic == pytest.approx(expected.statistic)
        assert report.p_value == pytest.approx(expected.pvalue)
        assert report.method == "kolmogorov_smirnov"

    def test_monte_carlo_p_value(self):
        sample = np.random.default_rng(3).normal(5.0, 2.0, size=60)
        report = ks_normality(sample, n_replicates=199, seed=1)
        assert report.method == "lilliefors_mc"
        assert 1 / 200 <= report.p_value <= 1.0
        # p = (1 + exceedances) / (1 + replicates)
        assert (report.p_value * 200) == pytest.approx(round(report.p_value * 200))

    def test_monte_carlo_is_seeded(self):
        sample = np.random.default_rng(3).normal(size=40)
        a = ks_normality(sample, n_replicates=300, seed=9)
        b = ks_normality(sample, n_replicates=300, seed=9)
        assert a == b

    def test_exponential_is_rejected(self):
        sample = np.random.default_rng(5).exponential(size=300)
        report = ks_normality(sample, n_replicates=300, seed=0)
        assert report.p_value == pytest.approx(1 / 301)
        assert report.reject_at_005

    def test_bad_arguments(self):
        sample = normal_quantiles(20)
        with pytest.raises(StatisticalTestError):
            ks_normality(sample, mode="fixed_params", scale=0.0)
        with pytest.raises(StatisticalTestError):
            ks_normality(sample, mode="guess")
        with pytest.raises(StatisticalTestError):
            ks_normality(sample, n_replicates=0)


@pytest.mark.slow
def test_shapiro_wilk_size_at_five_percent():
    rng = np.random.default_rng(21)
    rejected = [shapiro_wilk(rng.normal(size=500)).reject_at_005 for _ in range(5000)]
    assert 0.03 <= np.mean(rejected) <= 0.07


@pytest.mark.slow
def test_fixed_params_ks_size_at_five_percent():
    rng = np.random.default_rng(22)
    rejected = [ks_normality(rng.normal(size=500), mode="fixed_params").reject_at_005 for _ in range(5000)]
    assert 0.03 <= np.mean(rejected) <= 0.07


@pytest.mark.slow
def test_monte_carlo_ks_size_at_five_percent():
    # 2000 null samples of 500 with 199 replicates each; nominal size is 9/200
    rng = np.random.default_rng(23)
    rejected = [ks_normality(rng.normal(size=500), n_replicates=199, seed=i).reject_at_005 for i in range(2000)]
    assert 0.03 <= np.mean(rejected) <= 0.07


@pytest.mark.parametrize("draw", [
    lambda rng: rng.standard_t(3, size=1000),
    lambda rng: rng.uniform(size=1000),
], ids=["student_t3", "uniform"])
def test_heavy_and_light_tails_are_rejected(draw):
    sample = draw(np.random.default_rng(24))
    assert shapiro_wilk(sample).reject_at_005
    assert ks_normality(sample, n_replicates=199, seed=0).reject_at_005


class TestMeanTest:
    def test_symmetric_around_one(self):
        report = mean_equals_one_ttest([0.9, 1.0, 1.1])
        assert report.statistic == pytest.approx(0.0, abs=1e-12)
        assert report.p_value == pytest.approx(1.0)

    def test_shifted_mean_is_rejected(self):
        sample = 1.5 + 0.1 * np.random.default_rng(6).standard_normal(40)
        assert mean_equals_one_ttest(sample).reject_at_005

    def test_two_values_are_enough(self):
        assert mean_equals_one_ttest([0.8, 1.3]).n == 2


def test_pearson_correlation():
    x = np.arange(10.0)
    assert pearson_correlation(x, 2 * x + 1) == pytest.approx(1.0)
    assert math.isnan(pearson_correlation(x, np.ones(10)))
    assert math.isnan(pearson_correlation([1.0], [2.0]))


def make_instrument(symbol: str, group: str, t_price: float, n: int = 30, seed: int = 0, volume=None):
    rng = np.random.default_rng(seed)
    gammas = 1.0 + 0.1 * rng.standard_normal(n)
    prices = t_price * rng.uniform(0.8, 1.2, n)
    sample = GammaSample(symbol, gammas, group, volume)
    return sample, CharacteristicTimes(symbol, prices, prices * gammas ** 2)


class TestInvariantReport:
    def test_per_instrument_volume_filter(self):
        volume = np.full(30, 1000.0)
        volume[[3, 7]] = 100.0
        sample, times = make_instrument("FUT", "futures", 120.0, volume=volume)
        table = invariant_report([sample], [times], n_replicates=99)
        assert list(table.columns) == PER_INSTRUMENT_COLUMNS
        row = table.iloc[0]
        assert row["n_days"] == 28
        assert row["mean_gamma"] == pytest.approx(np.delete(sample.values, [3, 7]).mean())
        assert 0 < row["sw_p"] <= 1
        assert 0 < row["ks_p"] <= 1
        assert 0 < row["t_test_p"] <= 1

    def test_small_sample_gets_nan_p_values(self):
        sample, times = make_instrument("ONE", "", 100.0, n=2)
        row = invariant_report([sample], [times], n_replicates=99).iloc[0]
        assert math.isnan(row["sw_p"])
        assert math.isnan(row["ks_p"])
        assert not math.isnan(row["t_test_p"])

    def test_exchange_mode_keeps_liquid_instruments(self):
        pairs = [make_instrument(f"S{i}", "stocks", tp, seed=i) for i, tp in enumerate([100.0, 200.0, 2000.0])]
        pairs.append(make_instrument("ILL", "bonds", 5000.0, seed=9))
        samples, times = zip(*pairs)
        table = invariant_report(samples, times, mode="exchange", n_replicates=99)
        assert list(table.columns) == EXCHANGE_COLUMNS
        assert table["group"].tolist() == ["stocks"]
        row = table.iloc[0]
        assert row["total"] == 3
        assert row["n_liquid"] == 2
        assert row["mean_gamma"] == pytest.approx(np.mean([samples[0].mean, samples[1].mean]))
        assert math.isnan(row["sw_p"])

    def test_everything_filtered(self):
        sample, times = make_instrument("ILL", "bonds", 5000.0)
        with pytest.raises(EmptyReportError):
            invariant_report([sample], [times], mode="exchange")
        with pytest.raises(EmptyReportError):
            invariant_report([], [])

    def test_misaligned_inputs(self):
        sample, times = make_instrument("A", "", 100.0)
        with pytest.raises(ConfigurationError):
            invariant_report([sample], [CharacteristicTimes("A", [1.0], [1.0])])
        with pytest.raises(ConfigurationError):
            invariant_report([sample], [times], mode="weekly")

    def test_samples_from_estimates_skip_undefined_days(self):
        spec = InstrumentSpec("EST", 0.01, "08:00:00", "16:30:00")
        days = [window(price_std=0.02, traded=4000), window(price_std=0.0), window(price_std=0.03, traded=4000)]
        sample, times = samples_from_estimates("EST", estimate_windows(days, spec), group="g")
        assert sample.n == 2
        assert sample.values[0] == pytest.approx(1.0)
        assert sample.values[1] == pytest.approx(1.5)
        assert list(sample.traded_volume) == [4000.0, 4000.0]
        assert times.t_price.size == 2
        assert sample.group == "g"
