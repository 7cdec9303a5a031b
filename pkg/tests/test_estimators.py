import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.errors import DomainError, UndefinedGammaError, UndefinedTimeError, UndefinedVolatilityError
from src.estimators import (
    AnnualizationCalendar,
    annualize,
    correction_coefficient,
    correction_curve,
    estimate_window,
    estimate_windows,
    estimates_frame,
    gamma,
    instantaneous_volatility,
    mean_gamma,
    one_sided_volume,
    passive_fill_probability,
    scale_sigma,
    spread_in_ticks,
    t_price,
    t_volume,
    uncorrected_t_volume,
)
from src.marketdata import InstrumentSpec, aggregate_windows
from src.simulator import SimConfig, calibrate_equilibrium, simulate_streams

from .helpers import window

SPEC = InstrumentSpec("EST", 0.01, "08:00:00", "16:30:00")


class TestScaling:
    def test_square_root_of_time(self):
        assert scale_sigma(2.0, 300, 1200) == pytest.approx(4.0)
        assert scale_sigma(1.5, 60, 90) == pytest.approx(1.83712, abs=1e-5)

    def test_zero_interval_rejected(self):
        with pytest.raises(DomainError):
            scale_sigma(1.0, 0, 10)

    def test_annualize_full_session(self):
        assert annualize(0.01, SPEC.session_seconds) == pytest.approx(0.15875, abs=1e-5)
        calendar = AnnualizationCalendar(sessions_per_year=250, session_seconds=3600)
        assert annualize(0.01, 900, calendar) == pytest.approx(0.01 * math.sqrt(1000))


class TestCorrection:
    def test_known_values(self):
        assert correction_coefficient(1.0) == 1.0
        assert correction_coefficient(4.0) == pytest.approx(0.611565, abs=1e-6)
        assert correction_coefficient(1e6) == pytest.approx(0.5, abs=1e-3)

    def test_below_one_tick_rejected(self):
        with pytest.raises(DomainError):
            correction_coefficient(0.5)

    def test_curve_is_strictly_decreasing(self):
        curve = correction_curve(np.linspace(1, 100, 1000))
        assert curve[0] == 1.0
        assert np.all(np.diff(curve) < 0)
        assert np.all(curve > 0.5)

    @given(st.floats(1.0, 1.2))
    def test_small_spread_expansion(self, n):
        assert abs(math.sqrt(correction_coefficient(n)) - (1 - (n - 1) / 4)) < 0.01

    def test_wide_spread_limit(self):
        assert math.sqrt(correction_coefficient(1e4)) == pytest.approx(1 / math.sqrt(2), abs=1e-2)

    def test_spread_in_ticks_clamps(self):
        assert spread_in_ticks(0.005, 0.01) == 1.0
        assert spread_in_ticks(0.005, 0.01, clamp=False) == pytest.approx(0.5)
        assert spread_in_ticks(0.04, 0.01) == pytest.approx(4.0)


class TestCharacteristicTimes:
    def test_t_price(self):
        assert t_price(window(duration=300, spread=0.01, price_std=0.02)) == pytest.approx(75.0)

    def test_t_price_static_price(self):
        with pytest.raises(UndefinedTimeError):
            t_price(window(price_std=0.0))

    def test_t_volume_one_tick(self):
        agg = window(duration=300, bid_vol=1000, ask_vol=1000, traded=500)
        assert uncorrected_t_volume(agg) == pytest.approx(1200.0)
        assert t_volume(agg, SPEC) == pytest.approx(1200.0)

    def test_t_volume_corrected(self):
        agg = window(duration=300, spread=0.04, bid_vol=1000, ask_vol=1000, traded=500)
        assert t_volume(agg, SPEC) == pytest.approx(1962.18, abs=0.01)

    def test_t_volume_without_trades(self):
        with pytest.raises(DomainError):
            t_volume(window(traded=0, n_trades=0), SPEC)

    def test_one_sided_volume(self):
        agg = window(duration=300, traded=900)
        assert one_sided_volume(600, agg) == pytest.approx(900.0)
        assert one_sided_volume(0, agg) == 0.0


class TestInvariant:
    def test_equilibrium_gamma_is_one(self):
        agg = window(spread=0.01, price_std=0.02, bid_vol=500, ask_vol=500, traded=4000)
        assert gamma(agg, SPEC) == pytest.approx(1.0)

    def test_undefined_cases(self):
        with pytest.raises(UndefinedGammaError):
            gamma(window(price_std=0.0), SPEC)
        with pytest.raises(UndefinedGammaError):
            gamma(window(traded=0, n_trades=0), SPEC)
        with pytest.raises(UndefinedGammaError):
            gamma(window(n_quotes=0), SPEC)

    @given(
        spread_ticks=st.integers(1, 10),
        price_std=st.floats(1e-4, 1.0),
        book=st.floats(10, 1e5),
        traded=st.floats(1, 1e6),
        duration=st.sampled_from([60.0, 300.0, 3600.0]),
    )
    def test_gamma_squared_is_time_ratio(self, spread_ticks, price_std, book, traded, duration):
        agg = window(duration=duration, spread=spread_ticks * 0.01, price_std=price_std,
                     bid_vol=book / 2, ask_vol=book / 2, traded=traded)
        assert gamma(agg, SPEC) ** 2 == pytest.approx(t_volume(agg, SPEC) / t_price(agg), rel=1e-9)

    def test_gamma_squared_is_time_ratio_on_random_windows(self):
        rng = np.random.default_rng(2016)
        n = 100_000
        spread = 0.01 * rng.uniform(0.5, 20.0, n)
        price_std = rng.uniform(1e-4, 1.0, n)
        book = rng.uniform(10, 1e5, n)
        traded = rng.uniform(1, 1e6, n)
        duration = rng.choice([60.0, 300.0, 3600.0], n)
        squared, ratio = np.empty(n), np.empty(n)
        for i in range(n):
            agg = window(duration=duration[i], spread=spread[i], price_std=price_std[i],
                         bid_vol=book[i] / 2, ask_vol=book[i] / 2, traded=traded[i])
            squared[i] = gamma(agg, SPEC) ** 2
            ratio[i] = t_volume(agg, SPEC) / t_price(agg)
        np.testing.assert_allclose(squared, ratio, rtol=1e-12)

    @given(scale=st.floats(0.1, 10.0))
    def test_gamma_ignores_window_length(self, scale):
        # σ scales with sqrt(ΔT) and traded volume with ΔT
        base = window(duration=300, spread=0.01, price_std=0.02, traded=4000)
        scaled = window(duration=300 * scale, spread=0.01, price_std=0.02 * math.sqrt(scale), traded=4000 * scale)
        assert gamma(scaled, SPEC) == pytest.approx(gamma(base, SPEC), rel=1e-9)


class TestInstantaneousVolatility:
    def test_equilibrium_value(self):
        agg = window(spread=0.01, price=100, bid_vol=500, ask_vol=500, traded=4000)
        assert instantaneous_volatility(agg, SPEC) == pytest.approx(2e-4)

    def test_zero_trades_gives_zero(self):
        assert instantaneous_volatility(window(traded=0, n_trades=0), SPEC) == 0.0

    def test_empty_book(self):
        with pytest.raises(UndefinedVolatilityError):
            instantaneous_volatility(window(bid_vol=0, ask_vol=0), SPEC)

    def test_no_quotes(self):
        with pytest.raises(DomainError):
            instantaneous_volatility(window(n_quotes=0), SPEC)

    def test_quiet_window_gives_zero(self):
        quiet = window(traded=0, n_trades=0, n_quotes=0)
        assert not quiet.valid
        assert instantaneous_volatility(quiet, SPEC) == 0.0
        with pytest.raises(DomainError):
            instantaneous_volatility(window(traded=0, n_trades=0, n_quotes=0, spread=0.0, price=math.nan), SPEC)

    @given(traded=st.floats(1, 1e6), extra=st.floats(1, 1e6))
    def test_increases_with_traded_volume(self, traded, extra):
        low = instantaneous_volatility(window(traded=traded), SPEC)
        assert instantaneous_volatility(window(traded=traded + extra), SPEC) > low

    @given(ticks=st.floats(1.0, 50.0), extra=st.floats(0.01, 10.0))
    def test_increases_with_spread(self, ticks, extra):
        # the shrinking P(n) never outweighs the wider spread
        low = instantaneous_volatility(window(spread=0.01 * ticks), SPEC)
        assert instantaneous_volatility(window(spread=0.01 * (ticks + extra)), SPEC) > low

    def test_doubled_window_with_fixed_averages_is_exactly_sqrt_two(self):
        # same book and spread, twice the time at the same trading pace
        short = window(duration=300.0, spread=0.02, bid_vol=700, ask_vol=300, traded=4000)
        long = window(duration=600.0, spread=0.02, bid_vol=700, ask_vol=300, traded=8000)
        ratio = instantaneous_volatility(long, SPEC) / instantaneous_volatility(short, SPEC)
        assert ratio == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_doubling_the_window_scales_by_sqrt_two(self):
        config = SimConfig(seed=3, session_length=7200.0, n_days=3, trade_rate=0.5)
        quotes, trades, spec = simulate_streams(config)

        def mean_sigma(dt: float) -> float:
            windows = [w for w in aggregate_windows(quotes, trades, spec, dt) if w.valid]
            return float(np.mean([instantaneous_volatility(w, spec) for w in windows]))

        assert mean_sigma(600.0) / mean_sigma(300.0) == pytest.approx(math.sqrt(2), rel=0.03)

    def test_matches_sigma_over_price_in_equilibrium(self):
        agg = window(spread=0.03, price=50, price_std=0.06, bid_vol=800, ask_vol=700, traded=3000)
        assert gamma(agg, SPEC) != pytest.approx(1.0)
        # rescale traded volume so γ = 1, then σ_I must equal σ/price
        g = gamma(agg, SPEC)
        balanced = window(spread=0.03, price=50, price_std=0.06, bid_vol=800, ask_vol=700, traded=3000 * g ** 2)
        assert gamma(balanced, SPEC) == pytest.approx(1.0)
        assert instantaneous_volatility(balanced, SPEC) == pytest.approx(0.06 / 50)


@pytest.mark.slow
def test_window_sigma_recovers_true_volatility():
    config = calibrate_equilibrium(SimConfig(seed=17, n_days=6))
    quotes, trades, spec = simulate_streams(config)
    windows = [w for w in aggregate_windows(quotes, trades, spec, config.window) if w.valid]
    assert len(windows) >= 500
    estimated = np.array([instantaneous_volatility(w, spec) for w in windows])
    truth = config.true_sigma / np.array([w.avg_price for w in windows])
    assert np.median(np.abs(estimated / truth - 1)) < 0.15


def test_passive_fill_probability():
    assert passive_fill_probability() == pytest.approx(0.317311, abs=1e-6)


class TestEstimateSets:
    def test_defined_window(self):
        est = estimate_window(window(spread=0.01, price_std=0.02, traded=4000), SPEC)
        assert est.gamma == pytest.approx(1.0)
        assert est.t_price == pytest.approx(75.0)
        assert est.correction == 1.0
        assert est.sigma_inst_annualized == pytest.approx(annualize(2e-4, 300, AnnualizationCalendar.for_instrument(SPEC)))

    def test_undefined_quantities_are_empty(self):
        est = estimate_window(window(price_std=0.0, traded=0, n_trades=0), SPEC)
        assert est.t_price is None
        assert est.t_volume is None
        assert est.gamma is None
        assert est.sigma_inst == 0.0

    def test_frame_and_mean(self):
        estimates = estimate_windows([window(price_std=0.02, traded=4000), window(price_std=0.0)], SPEC)
        frame = estimates_frame(estimates)
        assert len(frame) == 2
        assert frame["gamma"].isna().tolist() == [False, True]
        assert mean_gamma(estimates) == pytest.approx(1.0)
        assert math.isnan(mean_gamma([]))
