import json

import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigurationError
from src.pipeline import COMMANDS, PipelineRunner, RunConfig, load_manifest_sources
from tickvol import main

SHORT_SIM = {"session_length": 3600, "n_days": 3, "seed": 5, "equilibrium": True}


def write_config(path, data: dict):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def simulated(tmp_path):
    """Equilibrium market written by the simulate command; returns the manifest path."""
    config = write_config(tmp_path / "sim.json", {"out": "sim", "simulate": SHORT_SIM})
    assert main(["simulate", "--config", config]) == 0
    return tmp_path / "sim" / "manifest.json"


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig.load(None)
        assert config.format == "csv"
        assert config.aggregation.window == 300.0
        assert config.run_seed == config.simulate.seed

    def test_sections_are_parsed(self, tmp_path):
        path = write_config(tmp_path / "run.json", {
            "window": 60,
            "simulate": {"n_days": 2, "instruments": 3, "groups": ["a", "b"]},
            "invariant": {"mode": "exchange", "ks_replicates": 10},
            "fillsim": {"horizon": {"kind": "fixed", "seconds": 120}},
            "forecast": {"exclude_dates": ["2016-10-03"], "realized_interval": 10},
        })
        config = RunConfig.load(path)
        assert config.aggregation.window == 60.0
        assert config.simulate.n_days == 2
        assert config.simulate_options.instruments == 3
        assert config.invariant.mode == "exchange"
        assert config.fillsim.horizon_policy.seconds == 120
        assert config.forecast.exclude_dates == ("2016-10-03",)
        assert config.forecast.realized_interval == 10.0
        assert config.out == tmp_path / "out"

    @pytest.mark.parametrize("data", [
        {"colour": 1},
        {"simulate": {"speed": 3}},
        {"format": "xml"},
        {"seed": -1},
        {"fillsim": {"horizon": {"kind": "fixed"}}},
        {"forecast": {"realized_interval": 0}},
        {"simulate": {"sigma_spread": 0.5}},
        {"simulate": {"print_dispersion": 0}},
    ])
    def test_invalid_documents(self, tmp_path, data):
        path = write_config(tmp_path / "bad.json", data)
        with pytest.raises(ConfigurationError):
            RunConfig.load(path).fillsim.horizon_policy

    def test_unreadable_documents(self, tmp_path):
        with pytest.raises(ConfigurationError):
            RunConfig.load(tmp_path / "missing.json")
        (tmp_path / "broken.json").write_text("{", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            RunConfig.load(tmp_path / "broken.json")

    def test_overrides(self):
        config = RunConfig().with_overrides(out="elsewhere", seed=99, fmt="json", window=120)
        assert str(config.out) == "elsewhere"
        assert config.simulate.seed == 99
        assert config.format == "json"
        assert config.aggregation.window == 120.0


class TestSimulateCommand:
    def test_manifest_lists_written_files(self, simulated):
        manifest = json.loads(simulated.read_text(encoding="utf-8"))
        assert manifest["equilibrium"] is True
        assert manifest["seed"] == 5
        [entry] = manifest["instruments"]
        for key in ("quotes", "trades", "instrument"):
            assert (simulated.parent / entry[key]).exists()
        [source] = load_manifest_sources(simulated)
        assert source.missing_paths() == []

    def test_universe_of_instruments(self, tmp_path):
        config = RunConfig.from_dict({
            "out": str(tmp_path / "uni"),
            "simulate": {**SHORT_SIM, "n_days": 1, "instruments": 3, "book_depth_spread": 4.0, "groups": ["x", "y"]},
        })
        universe = PipelineRunner(config).simulate_service.universe()
        assert [c.symbol for c, _ in universe] == ["SIM01", "SIM02", "SIM03"]
        assert [g for _, g in universe] == ["x", "y", "x"]
        depths = [c.book_depth_per_level for c, _ in universe]
        assert depths[-1] == pytest.approx(4 * depths[0])
        assert len({c.seed for c, _ in universe}) == 3
        # deeper books trade faster at equilibrium
        assert universe[2][0].trade_rate == pytest.approx(4 * universe[0][0].trade_rate)

    def test_universe_spreads_volatility(self, tmp_path):
        config = RunConfig.from_dict({
            "out": str(tmp_path / "uni"),
            "simulate": {**SHORT_SIM, "instruments": 20, "true_sigma": 0.008, "sigma_spread": 10.0},
        })
        universe = [c for c, _ in PipelineRunner(config).simulate_service.universe()]
        sigmas = np.array([c.true_sigma for c in universe])
        np.testing.assert_allclose(sigmas[1:] / sigmas[:-1], 10 ** (1 / 19))
        assert sigmas[0] == pytest.approx(0.008)
        # T_Price shrinks by the square of σ, and equilibrium trading rises to match
        assert universe[-1].trade_rate == pytest.approx(100 * universe[0].trade_rate)

    def test_delegates_cover_every_command(self, tmp_path):
        config = RunConfig.from_dict({"out": str(tmp_path / "d"), "simulate": {**SHORT_SIM, "n_days": 1}})
        runner = PipelineRunner(config)
        assert all(callable(getattr(runner, c.replace("-", "_"))) for c in COMMANDS)
        paths = runner.simulate()
        assert {p.name for p in paths} == {"SIM.quotes.csv", "SIM.trades.csv", "SIM.instrument.json", "manifest.json"}
        assert all(p.parent == tmp_path / "d" for p in paths)

    def test_seed_flag_reproduces_output(self, tmp_path):
        config = write_config(tmp_path / "sim.json", {"simulate": {**SHORT_SIM, "n_days": 1}})
        assert main(["simulate", "--config", config, "--out", str(tmp_path / "a"), "--seed", "42"]) == 0
        assert main(["simulate", "--config", config, "--out", str(tmp_path / "b"), "--seed", "42"]) == 0
        a = (tmp_path / "a" / "SIM.trades.csv").read_bytes()
        assert a == (tmp_path / "b" / "SIM.trades.csv").read_bytes()


class TestAnalysisCommands:
    def test_estimate(self, tmp_path, simulated):
        config = write_config(tmp_path / "est.json", {"out": "est", "data": {"manifest": "sim/manifest.json"}})
        assert main(["estimate", "--config", config]) == 0
        out = tmp_path / "est"
        windows = pd.read_csv(out / "SIM.aggregates.csv")
        estimates = pd.read_csv(out / "SIM.estimates.csv")
        daily = pd.read_csv(out / "SIM.daily.csv")
        assert len(windows) == len(estimates) == 3 * 12
        assert len(daily) == 3
        assert daily["gamma"].between(0.3, 2.0).all()

    def test_estimate_json_format(self, tmp_path, simulated):
        config = write_config(tmp_path / "est.json", {"out": "est", "format": "json",
                                                      "data": {"manifest": "sim/manifest.json"}})
        assert main(["estimate", "--config", config, "--window", "600"]) == 0
        records = json.loads((tmp_path / "est" / "SIM.estimates.json").read_text(encoding="utf-8"))
        assert len(records) == 3 * 6
        assert {"t_price", "t_volume", "gamma", "sigma_inst"} <= set(records[0])

    def test_invariant(self, tmp_path, simulated):
        config = write_config(tmp_path / "inv.json", {"out": "inv", "data": {"manifest": "sim/manifest.json"},
                                                      "invariant": {"ks_replicates": 50}})
        assert main(["invariant", "--config", config]) == 0
        table = pd.read_csv(tmp_path / "inv" / "invariant_report.csv")
        assert table["symbol"].tolist() == ["SIM"]
        assert table.loc[0, "n_days"] == 3

    def test_reruns_are_byte_identical(self, tmp_path, simulated):
        for command in ("estimate", "invariant"):
            outputs = []
            for run in ("first", "second"):
                config = write_config(tmp_path / f"{command}.{run}.json", {
                    "out": f"{command}_{run}",
                    "data": {"manifest": "sim/manifest.json"},
                    "invariant": {"ks_replicates": 50},
                })
                assert main([command, "--config", config]) == 0
                out = tmp_path / f"{command}_{run}"
                outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            assert outputs[0] and outputs[0] == outputs[1]

    def test_fillsim_sweep(self, tmp_path):
        config = write_config(tmp_path / "fill.json", {
            "out": "fill",
            "simulate": {"session_length": 3600, "n_days": 2, "trade_rate": 0.5},
            "fillsim": {"spread_ticks": [1, 2], "curve_points": 11, "curve_max": 6},
        })
        assert main(["fillsim", "--config", config]) == 0
        results = pd.read_csv(tmp_path / "fill" / "fillsim.csv")
        assert results["symbol"].tolist() == ["SIM_N1", "SIM_N2"]
        assert results.loc[0, "measured_fraction"] > 0.999
        assert results.loc[1, "measured_fraction"] < results.loc[0, "measured_fraction"]
        curve = pd.read_csv(tmp_path / "fill" / "correction_curve.csv")
        assert len(curve) == 11
        assert curve.loc[0, "correction"] == 1.0

    def test_fillsim_from_data(self, tmp_path, simulated):
        config = write_config(tmp_path / "fill.json", {"out": "fill", "data": {"manifest": "sim/manifest.json"}})
        assert main(["fillsim", "--config", config]) == 0
        results = pd.read_csv(tmp_path / "fill" / "fillsim.csv")
        assert results["month"].tolist() == ["2016-10"]


@pytest.mark.slow
def test_exchange_times_track_each_other(tmp_path):
    sim = write_config(tmp_path / "sim.json", {
        "out": "sim",
        "simulate": {"session_length": 7200, "n_days": 5, "seed": 21, "equilibrium": True,
                     "instruments": 20, "true_sigma": 0.008, "sigma_spread": 10.0},
    })
    assert main(["simulate", "--config", sim]) == 0
    config = write_config(tmp_path / "inv.json", {
        "out": "inv",
        "data": {"manifest": "sim/manifest.json"},
        "invariant": {"mode": "exchange", "ks_replicates": 50},
    })
    assert main(["invariant", "--config", config]) == 0
    [row] = pd.read_csv(tmp_path / "inv" / "invariant_report.csv").to_dict("records")
    assert row["total"] == row["n_liquid"] == 20
    assert row["corr_t_price_t_volume"] > 0.8
    assert row["mean_gamma"] == pytest.approx(1.0, abs=0.15)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [8, 11, 23])
def test_forecast_eval(tmp_path, seed):
    sim = write_config(tmp_path / "sim.json", {
        "out": "sim",
        "simulate": {"session_length": 1800, "n_days": 130, "seed": seed, "equilibrium": True,
                     "shift_day": 105, "shift_multiplier": 3.0},
    })
    assert main(["simulate", "--config", sim]) == 0
    config = write_config(tmp_path / "fc.json", {
        "out": "fc",
        "data": {"manifest": "sim/manifest.json"},
        "forecast": {"histories": [1, 5], "forecasts": [1, 5], "exclude_dates": ["2017-03-01"]},
    })
    assert main(["forecast-eval", "--config", config]) == 0
    out = tmp_path / "fc"
    comparison = pd.read_csv(out / "daily_comparison.csv")
    assert (comparison["date"] >= "2017-02-27").sum() == 25
    assert (comparison[["sigma_realized", "sigma_inst", "sigma_garch"]] > 0).all().all()
    summary = json.loads((out / "mse_summary.json").read_text(encoding="utf-8"))["SIM"]
    assert summary["excluded_dates"] == ["2017-03-01"]
    assert summary["n_days"] + 1 == len(comparison)
    # volatility triples late in the sample: same-day sigma_I follows, the GARCH forecast lags
    assert summary["mse_inst"] < summary["mse_garch"]
    assert summary["mse_inst"] < summary["mse_inst_lagged"]
    grid = pd.read_csv(out / "xi_grid.csv")
    assert len(grid) == 3
    cell = grid[(grid["history_min"] == 5) & (grid["forecast_min"] == 5)].iloc[0]
    assert cell["sigma_xi"] > 0
    assert (out / "xi_histogram.csv").exists()


class TestFailures:
    def test_missing_inputs_fail_before_work(self, tmp_path):
        config = write_config(tmp_path / "run.json", {
            "out": "out",
            "data": [{"quotes": "q.csv", "trades": "t.csv", "instrument": "i.json"}],
        })
        assert main(["estimate", "--config", config]) == 1
        assert not (tmp_path / "out").exists()

    def test_estimate_without_data(self, tmp_path):
        assert main(["estimate", "--out", str(tmp_path / "out")]) == 1

    def test_failed_run_promotes_nothing(self, tmp_path, simulated):
        config = write_config(tmp_path / "inv.json", {
            "out": "inv",
            "data": {"manifest": "sim/manifest.json"},
            "invariant": {"mode": "exchange", "t_price_limit": 0.0},
        })
        assert main(["invariant", "--config", config]) == 1
        assert list((tmp_path / "inv").iterdir()) == []
        assert not list(tmp_path.glob(".tmp_inv_*"))

    def test_unknown_command(self):
        with pytest.raises(ConfigurationError):
            PipelineRunner(RunConfig()).run("plot")

    def test_bad_flag_exits_with_usage(self):
        with pytest.raises(SystemExit) as info:
            main(["estimate", "--format", "xml"])
        assert info.value.code == 2
