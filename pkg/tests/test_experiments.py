"""Scenario runner, config validation, and output determinism."""

import json

import numpy as np
import pytest

from kdlab import cli
from kdlab.experiments import (
    CHANNELS_COLUMNS,
    CLASSICAL_SCAN_COLUMNS,
    SCAN_P3_COLUMNS,
    SCENARIOS,
    TIMESERIES_COLUMNS,
    TRAJECTORY_COLUMNS,
    ConfigError,
    ExperimentConfig,
    default_p3_grid,
    fit_first_maximum,
    format_number,
    load_config,
    preset,
    resolve_workers,
    run_scenario,
    write_csv,
)

TINY_SCAN = {
    "scenario": "scan-p3",
    "total_cycles": 20.0,
    "ramp_cycles": 0.5,
    "steps_per_cycle": 32,
    "window": [-2, 4],
    "p3_values": [0.0, 0.5],
}


def read_header(path):
    return path.read_text().splitlines()[0]


class TestConfigValidation:
    def test_missing_scenario_names_field(self):
        with pytest.raises(ConfigError, match="scenario"):
            ExperimentConfig.from_dict({"total_cycles": 10.0})

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError, match="scenario"):
            ExperimentConfig.from_dict({"scenario": "resonance"})

    def test_unknown_keys_named(self):
        with pytest.raises(ConfigError, match="p3_valves"):
            ExperimentConfig.from_dict({"scenario": "rabi", "p3_valves": [0.0]})

    def test_wrong_type_names_field(self):
        with pytest.raises(ConfigError, match="total_cycles"):
            ExperimentConfig.from_dict({"scenario": "rabi", "total_cycles": "long"})
        with pytest.raises(ConfigError, match="steps_per_cycle"):
            ExperimentConfig.from_dict({"scenario": "rabi", "steps_per_cycle": 32.5})
        with pytest.raises(ConfigError, match="amplitude"):
            ExperimentConfig.from_dict({"scenario": "rabi", "amplitude": True})

    def test_range_checks(self):
        with pytest.raises(ConfigError, match="ramp_cycles"):
            ExperimentConfig.from_dict(
                {"scenario": "rabi", "total_cycles": 10.0, "ramp_cycles": 6.0}
            )
        with pytest.raises(ConfigError, match="steps_per_cycle"):
            ExperimentConfig.from_dict({"scenario": "rabi", "steps_per_cycle": 8})
        with pytest.raises(ConfigError, match="window"):
            ExperimentConfig.from_dict({"scenario": "rabi", "window": [0, 1]})
        with pytest.raises(ConfigError, match="p3_values"):
            ExperimentConfig.from_dict({"scenario": "scan-p3", "p3_values": []})

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(TINY_SCAN))
        config = load_config(path)
        assert config.total_cycles == 20.0
        assert config.p3_values == (0.0, 0.5)
        assert config.window == (-2, 4)

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(path)
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="object"):
            load_config(path)

    def test_presets_all_load(self):
        for name in SCENARIOS:
            config = preset(name)
            assert config.scenario == name
        with pytest.raises(ConfigError, match="preset"):
            preset("figures")

    def test_preset_parameters(self):
        assert preset("rabi").total_cycles == 1000.0
        assert preset("rabi").steps_per_cycle == 128
        assert preset("scan-p3").ramp_cycles == 0.5
        assert preset("classical-scan").ramp_cycles == 10.0

    def test_overrides_take_effect(self):
        config = ExperimentConfig.from_dict({"scenario": "rabi", "amplitude": 0.02})
        assert config.amplitude == 0.02
        assert config.total_cycles == 1000.0


class TestHelpers:
    def test_default_grid_shape(self):
        grid = default_p3_grid()
        assert len(grid) == 44
        assert grid[0] == 0.0
        assert grid[-1] == 2.5
        assert 0.91 in grid and 1.09 in grid
        diffs = np.diff(grid)
        assert np.all(diffs > 0.009)

    def test_format_number_digits(self):
        assert format_number(1 / 3) == "3.33333333333e-01"
        assert format_number(0.0) == "0.00000000000e+00"

    def test_write_csv_row_width_checked(self, tmp_path):
        with pytest.raises(ValueError, match="width"):
            write_csv(tmp_path / "x.csv", ("a", "b"), [(1.0, 2.0, 3.0)])

    def test_write_csv_parses_back(self, tmp_path):
        path = tmp_path / "x.csv"
        write_csv(path, ("a", "b"), [(1.0, 0.5), (2.0, 0.25)])
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert np.array_equal(data, [[1.0, 0.5], [2.0, 0.25]])
        assert path.read_text().endswith("\n")

    def test_first_maximum_refined_between_samples(self):
        t = np.arange(0.0, 101.0)
        v = np.sin(np.pi * t / 77.0) ** 2
        t_max, bracketed = fit_first_maximum(t, v)
        assert bracketed
        assert abs(t_max - 38.5) < 0.05

    def test_first_maximum_unbracketed_flagged(self):
        t = np.arange(0.0, 10.0)
        t_max, bracketed = fit_first_maximum(t, t**2)
        assert not bracketed
        assert t_max == 9.0

    def test_resolve_workers(self, monkeypatch):
        monkeypatch.delenv("KDLAB_WORKERS", raising=False)
        assert resolve_workers() == 1
        assert resolve_workers(4) == 4
        monkeypatch.setenv("KDLAB_WORKERS", "3")
        assert resolve_workers() == 3
        assert resolve_workers(2) == 2
        monkeypatch.setenv("KDLAB_WORKERS", "zero")
        with pytest.raises(ConfigError, match="KDLAB_WORKERS"):
            resolve_workers()
        with pytest.raises(ConfigError, match="at least 1"):
            resolve_workers(0)


class TestScenarioOutputs:
    def test_scan_headers_and_summary(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY_SCAN)
        summary = run_scenario(config, tmp_path)
        assert read_header(tmp_path / "scan_p3.csv") == ",".join(SCAN_P3_COLUMNS)
        on_disk = json.loads((tmp_path / "scan_p3_summary.json").read_text())
        assert on_disk == summary
        assert on_disk["parameters"] == config.to_dict()
        assert any("grid" in note for note in on_disk["notes"])

    def test_scan_deterministic_across_runs_and_workers(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY_SCAN)
        names = ("scan_p3.csv", "scan_p3_summary.json")
        run_scenario(config, tmp_path / "a", workers=1)
        run_scenario(config, tmp_path / "b", workers=1)
        run_scenario(config, tmp_path / "c", workers=2)
        for name in names:
            first = (tmp_path / "a" / name).read_bytes()
            assert (tmp_path / "b" / name).read_bytes() == first
            assert (tmp_path / "c" / name).read_bytes() == first

    def test_rabi_short_run_not_bracketed(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {
                "scenario": "rabi",
                "total_cycles": 25.0,
                "ramp_cycles": 2.0,
                "steps_per_cycle": 32,
                "window": [-2, 4],
            }
        )
        summary = run_scenario(config, tmp_path)
        assert read_header(tmp_path / "rabi_timeseries.csv") == ",".join(
            TIMESERIES_COLUMNS
        )
        assert not summary["sanity"]["period_bracketed"]
        assert "period not bracketed" in summary["notes"]
        assert summary["derived"]["relative_deviation"] is None
        data = np.loadtxt(tmp_path / "rabi_timeseries.csv", delimiter=",", skiprows=1)
        assert data.shape == (26, len(TIMESERIES_COLUMNS))
        assert data[0, 1] == 1.0

    def test_ablation_writes_both_series(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {
                "scenario": "ablation",
                "total_cycles": 20.0,
                "ramp_cycles": 2.0,
                "steps_per_cycle": 32,
                "window": [-2, 4],
            }
        )
        summary = run_scenario(config, tmp_path)
        full = np.loadtxt(tmp_path / "ablation_full.csv", delimiter=",", skiprows=1)
        same = np.loadtxt(
            tmp_path / "ablation_same_sign.csv", delimiter=",", skiprows=1
        )
        assert full.shape == same.shape
        occ2 = TIMESERIES_COLUMNS.index("occ2_up")
        assert summary["sanity"]["suppressed_at_least_4_orders"]
        assert same[-1, occ2] < 1e-4 * full[-1, occ2]

    def test_channels_outputs(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {"scenario": "channels", "p3_values": [0.0, 1.0]}
        )
        summary = run_scenario(config, tmp_path)
        assert read_header(tmp_path / "channels.csv") == ",".join(CHANNELS_COLUMNS)
        assert summary["sanity"]["ratio_within_factor_2"]
        assert summary["sanity"]["root_within_2_percent"]
        data = np.loadtxt(tmp_path / "channels.csv", delimiter=",", skiprows=1)
        # at rest the spin-preserving positive path is shut and the
        # negative-frequency one carries essentially the whole probability
        assert data[0, 2] == 0.0 and data[0, 5] == 0.0
        assert data[0, 4] > 0.99 * data[0, 1]

    def test_classical_outputs(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {
                "scenario": "classical-scan",
                "total_cycles": 40.0,
                "p3_values": [0.0, 0.1],
            }
        )
        summary = run_scenario(config, tmp_path)
        assert read_header(tmp_path / "classical_scan.csv") == ",".join(
            CLASSICAL_SCAN_COLUMNS
        )
        assert read_header(tmp_path / "classical_trajectory.csv") == ",".join(
            TRAJECTORY_COLUMNS
        )
        assert summary["sanity"]["final_p1_within_5_percent"]
        trajectory = np.loadtxt(
            tmp_path / "classical_trajectory.csv", delimiter=",", skiprows=1
        )
        # sixteen samples per cycle, gamma column close to one
        assert trajectory.shape[0] == 40 * 16 + 1
        assert np.allclose(trajectory[:, 5], 1.0, atol=1e-5)

    def test_convergence_summary_only(self, tmp_path):
        config = ExperimentConfig.from_dict(
            {
                "scenario": "convergence",
                "total_cycles": 20.0,
                "ramp_cycles": 2.0,
                "window": [-2, 4],
                "steps_per_cycle": 32,
            }
        )
        summary = run_scenario(config, tmp_path)
        assert list(tmp_path.iterdir()) == [tmp_path / "convergence_summary.json"]
        assert summary["sanity"]["converged_below_1e-3"]
        assert summary["derived"]["max_rel_change"] < 1e-3


class TestCli:
    def test_config_run(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"scenario": "channels", "p3_values": [0.0]}))
        out = tmp_path / "out"
        code = cli.main(
            ["channels", "--config", str(path), "--outdir", str(out)]
        )
        assert code == 0
        assert (out / "channels.csv").exists()
        assert (out / "channels_summary.json").exists()

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"scenario": "channels", "p3valves": [0.0]}))
        code = cli.main(["channels", "--config", str(path), "--outdir", str(tmp_path)])
        assert code == 2
        assert "p3valves" in capsys.readouterr().err

    def test_scenario_mismatch_rejected(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"scenario": "channels"}))
        code = cli.main(["rabi", "--config", str(path), "--outdir", str(tmp_path)])
        assert code == 2
        assert "channels" in capsys.readouterr().err

    def test_preset_flag_mismatch_rejected(self, tmp_path, capsys):
        code = cli.main(["rabi", "--preset", "channels", "--outdir", str(tmp_path)])
        assert code == 2
        assert "rabi" in capsys.readouterr().err
