import hashlib
import json

import numpy as np
import pytest

from darwinbath import ConfigError
from darwinbath.cli import load_config, main

FAST = [
    "--t-max-gamma", "2.0",
    "--samples", "30",
]


def run_cli(argv):
    return main([str(a) for a in argv])


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_table(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


class TestLoadConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None, {})
        assert cfg.n_env == 900

    def test_file_and_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n_env": 40, "alpha0": [1.0, 0.5], "master_seed": 7, "t_max_gamma": 0.2}))
        cfg = load_config(str(path), {"master_seed": 9})
        assert cfg.n_env == 40
        assert cfg.alpha0 == 1.0 + 0.5j
        assert cfg.master_seed == 9  # flags win

    def test_gamma_bar_ratio(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"gamma": 0.01, "gamma_bar_ratio": 50}))
        cfg = load_config(str(path), {})
        assert cfg.coupling_gamma_bar == pytest.approx(0.5)

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n_envv": 4}))
        with pytest.raises(ConfigError):
            load_config(str(path), {})

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/cfg.json", {})

    def test_bad_complex(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"alpha0": "three"}))
        with pytest.raises(ConfigError):
            load_config(str(path), {})


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n_env": 0}))
        assert run_cli(["dynamics", "--config", path, "--out", tmp_path / "o"]) == 2

    def test_invariant_violation_is_2(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"omega_min": 1.2}))
        assert run_cli(["dynamics", "--config", path, "--out", tmp_path / "o"]) == 2

    def test_unwritable_out_is_2(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert run_cli(["dynamics", "--out", blocker, *FAST]) == 2

    def test_success_is_0(self, tmp_path):
        assert run_cli(["dynamics", "--out", tmp_path, *FAST]) == 0


class TestOutputs:
    def test_dynamics_table(self, tmp_path):
        assert run_cli(["dynamics", "--out", tmp_path, *FAST]) == 0
        header, rows = read_table(tmp_path / "dynamics.csv")
        assert header == [
            "t", "gamma_t", "system_excitation", "environment_excitation", "total_excitation",
        ]
        assert len(rows) == 600
        first, last = rows[0], rows[-1]
        assert float(first[2]) == pytest.approx(9.0, rel=1e-9)
        # system decays, environment rises, sum conserved
        assert float(last[2]) < 2.0
        assert float(last[3]) > 7.0
        assert float(last[4]) == pytest.approx(9.0, abs=1e-8)
        # gamma_t column is decay_rate * t
        assert float(last[1]) == pytest.approx(2.0, rel=1e-9)

    def test_manifest_written(self, tmp_path):
        run_cli(["dynamics", "--out", tmp_path, *FAST])
        manifest = json.loads((tmp_path / "dynamics_manifest.json").read_text())
        assert manifest["command"] == "dynamics"
        assert manifest["config"]["n_env"] == 900
        assert manifest["outputs"] == [str(tmp_path / "dynamics.csv")]
        assert "total" in manifest["timings_s"]

    def test_pip_table(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_env": 60, "n_times": 8, "mc_samples": 25, "t_max_gamma": 0.2}))
        assert run_cli(["pip", "--config", cfg, "--out", tmp_path]) == 0
        header, rows = read_table(tmp_path / "pip.csv")
        assert header == ["t", "gamma_t", "fraction", "mean_mi", "stderr_mi", "h_system"]
        assert len(rows) == 8 * 60  # full grid used for small baths
        # last fraction of each time block is exact: stderr 0
        by_time = {}
        for row in rows:
            by_time.setdefault(row[0], []).append(row)
        for block in by_time.values():
            assert float(block[-1][2]) == 1.0
            assert float(block[-1][4]) == 0.0

    def test_redundancy_table_undefined_markers(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_env": 60, "n_times": 6, "mc_samples": 25, "t_max_gamma": 0.2}))
        assert run_cli(["redundancy", "--config", cfg, "--out", tmp_path]) == 0
        header, rows = read_table(tmp_path / "redundancy.csv")
        assert header == ["t", "gamma_t", "h_system", "mi_full", "f_delta", "r_delta", "r_rel"]
        assert rows[0][4] == "nan"
        assert float(rows[0][6]) == 0.0
        for row in rows[1:]:
            if row[4] != "nan":
                assert float(row[5]) == pytest.approx(1.0 / float(row[4]), rel=1e-12)
                assert float(row[6]) == pytest.approx(
                    float(row[5]) * float(row[3]), rel=1e-12
                )

    def test_sweep_and_nonmarkov_tables(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_env": 120, "n_times": 60, "mc_samples": 20, "t_max_gamma": 0.8}))
        code = run_cli(
            ["sweep", "--config", cfg, "--out", tmp_path, "--ratios", "10,50", "--pairs", "40"]
        )
        assert code == 0
        header, rows = read_table(tmp_path / "sweep.csv")
        assert header[:5] == [
            "gamma_bar_ratio", "gamma_bar", "nm_degree", "nm_qd", "avg_relative_redundancy",
        ]
        assert len(rows) == 2
        # toy bath: just check the columns are populated and positive
        assert all(float(r[2]) > 0 and float(r[4]) > 0 for r in rows)

        code = run_cli(
            ["nonmarkov", "--config", cfg, "--out", tmp_path, "--ratios", "10,50", "--pairs", "40"]
        )
        assert code == 0
        header, rows = read_table(tmp_path / "nonmarkov.csv")
        assert header[:3] == ["gamma_bar_ratio", "gamma_bar", "nm_degree"]

    def test_bph_table(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_env": 120, "mc_samples": 20, "t_max_gamma": 0.8}))
        assert run_cli(["bph", "--config", cfg, "--out", tmp_path, "--f-points", "5", "--t-gammas", "0.8"]) == 0
        header, rows = read_table(tmp_path / "bph.csv")
        assert header[2] == "fraction"
        values = [float(r[3]) for r in rows]
        assert values == sorted(values)  # distinguishability grows with f
        assert values[-1] > 0.99

    def test_oracle_table(self, tmp_path):
        assert run_cli(["oracle", "--out", tmp_path, "--n-times", "4", "--t-max", "8"]) == 0
        header, rows = read_table(tmp_path / "oracle.csv")
        assert header[-1] == "abs_diff"
        assert max(float(r[-1]) for r in rows) < 1e-6

    def test_concentration_table(self, tmp_path):
        assert run_cli(["concentration", "--out", tmp_path, "--samples", "100"]) == 0
        header, rows = read_table(tmp_path / "concentration.csv")
        assert {r[0] for r in rows} == {"rectangle", "two_rectangles"}
        for row in rows:
            mean, expected, var = float(row[5]), float(row[6]), float(row[7])
            assert abs(mean - expected) <= 3 * np.sqrt(var / 100) + 1e-12


class TestDeterminism:
    def test_identical_seeds_byte_identical(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"n_env": 80, "n_times": 10, "mc_samples": 25, "master_seed": 123, "t_max_gamma": 0.3})
        )
        for sub in ("a", "b"):
            assert run_cli(["redundancy", "--config", cfg, "--out", tmp_path / sub]) == 0
            assert run_cli(["dynamics", "--config", cfg, "--out", tmp_path / sub]) == 0
        assert digest(tmp_path / "a" / "redundancy.csv") == digest(
            tmp_path / "b" / "redundancy.csv"
        )
        assert digest(tmp_path / "a" / "dynamics.csv") == digest(
            tmp_path / "b" / "dynamics.csv"
        )

    def test_seed_changes_sampled_output(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n_env": 300, "n_times": 10, "mc_samples": 25, "t_max_gamma": 2.0}))
        run_cli(["redundancy", "--config", cfg, "--out", tmp_path / "a", "--seed", "1"])
        run_cli(["redundancy", "--config", cfg, "--out", tmp_path / "b", "--seed", "2"])
        assert digest(tmp_path / "a" / "redundancy.csv") != digest(
            tmp_path / "b" / "redundancy.csv"
        )
