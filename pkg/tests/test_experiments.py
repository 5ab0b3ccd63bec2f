import math
import os
import subprocess
import sys

import pytest

from qec_spinsim.cli import main as cli_main, parse_grid, parse_sweep
from qec_spinsim.experiments import (
    ConfigError,
    ExperimentConfig,
    SweepRow,
    emit_csv,
    emit_manifest,
    make_protocol,
    parse_csv,
    point_params,
    run_experiment,
    t2_sweep,
)
from qec_spinsim.noise import FallbackReadout, p_idle

FAST = "fixed:400"


def config(**kw):
    base = dict(experiment="qec-step", code="surface17", encoding="hybrid",
                sweep_var="t_int", grid=(2.0,), seed=9, shots=FAST,
                threshold=2e-4)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError):
            config(grid=())

    def test_non_increasing_grid_rejected(self):
        with pytest.raises(ConfigError):
            config(grid=(2.0, 1.0))

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError):
            config(overrides=(("st.nope", 1.0),))

    def test_experiment_code_pairing(self):
        with pytest.raises(ConfigError):
            config(experiment="bs-prep", code="surface17")
        with pytest.raises(ConfigError):
            config(experiment="surface-prep", code="bs17")

    def test_inf_only_for_t2(self):
        with pytest.raises(ConfigError):
            config(grid=(1.0, math.inf))
        config(sweep_var="t2_star", grid=(21.0, math.inf))  # fine


class TestPointParams:
    def test_t_int_sweep_hybrid(self):
        params = point_params(config(readout="fallback"), 0.9)
        assert params.ancilla.t_int == 0.9
        assert params.ancilla.t_readout == pytest.approx(1.3)
        assert params.ancilla.readout_infidelity() == pytest.approx(
            FallbackReadout().infidelity(0.9))

    def test_t_int_sweep_all_ld_locks_duration_ratio(self):
        params = point_params(config(encoding="all-ld"), 2.0)
        # LD readout duration is ten times the ST axis (0.4 + t_int)
        assert params.data.t_readout == pytest.approx(24.0)
        assert params.data.readout_infidelity() == 2.4e-3  # constant

    def test_t_readout_sweep(self):
        cfg = config(sweep_var="t_readout", grid=(0.5,))
        assert point_params(cfg, 0.5).ancilla.t_readout == pytest.approx(0.5)
        cfg = config(sweep_var="t_readout", encoding="all-ld", grid=(0.5,))
        assert point_params(cfg, 0.5).data.t_readout == pytest.approx(5.0)

    def test_t2_sweep_derives_st_value(self):
        cfg = config(sweep_var="t2_star", grid=(42.0,))
        params = point_params(cfg, 42.0)
        assert params.data.t2_star == 42.0
        assert params.ancilla.t2_star == pytest.approx(42.0 / math.sqrt(2))

    def test_t2_infinity_kills_idle_errors(self):
        cfg = config(sweep_var="t2_star", grid=(math.inf,))
        proto = make_protocol(cfg, point_params(cfg, math.inf))
        assert proto.probabilities[4:] == (0.0, 0.0, 0.0, 0.0)

    def test_overrides_applied(self):
        cfg = config(overrides=(("st.p_cz", 4e-4), ("t_cz", 0.0)))
        params = point_params(cfg, 2.0)
        assert params.cross_p_cz == 4e-4
        assert params.data.t_cz == 0.0


class TestRunExperiment:
    def test_rows_and_manifest(self, tmp_path):
        rows, manifest = run_experiment(config(), out_dir=tmp_path, workers=0)
        assert len(rows) == 1
        row = rows[0]
        assert row.p_l_lower <= row.p_l_upper
        assert row.p_l_upper - row.p_l_lower == pytest.approx(
            1 - row.sampled_mass, rel=1e-9)
        assert row.baseline_bare == pytest.approx(p_idle(5.44, 21.0))
        assert row.baseline_echo == pytest.approx(p_idle(5.44, 210.0))
        assert manifest["seed"] == "9"
        assert "config_hash" in manifest and manifest["points"] == "1"
        assert (tmp_path / "results.csv").exists()
        assert (tmp_path / "manifest.txt").exists()
        assert (tmp_path / "subsets_000.csv").exists()

    def test_csv_round_trip(self, tmp_path):
        rows = [SweepRow(1.5, 1e-3, 2e-3, 1e-5, 0.1, 0.01, 0.9999, 12.25),
                SweepRow(2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.5)]
        path = tmp_path / "rows.csv"
        emit_csv(rows, path)
        assert parse_csv(path) == rows

    def test_header_only_round_trip(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path)
        assert path.read_text().startswith("sweep_value,")
        assert parse_csv(path) == []

    def test_reproducible_bytes_with_injected_clock(self, tmp_path):
        ticks = iter(range(1000))
        clock = lambda: float(next(ticks))
        run_experiment(config(), out_dir=tmp_path / "a", workers=0, clock=clock)
        ticks = iter(range(1000))
        run_experiment(config(), out_dir=tmp_path / "b", workers=0, clock=clock)
        assert (tmp_path / "a/results.csv").read_bytes() == \
            (tmp_path / "b/results.csv").read_bytes()
        assert (tmp_path / "a/manifest.txt").read_bytes() == \
            (tmp_path / "b/manifest.txt").read_bytes()

    def test_science_columns_reproducible_without_clock_control(self, tmp_path):
        rows_a, _ = run_experiment(config(), workers=0)
        rows_b, _ = run_experiment(config(), workers=0)
        for a, b in zip(rows_a, rows_b):
            assert (a.p_l_lower, a.p_l_upper, a.std_err, a.sampled_mass) == \
                (b.p_l_lower, b.p_l_upper, b.std_err, b.sampled_mass)

    def test_worker_pool_matches_inline(self, tmp_path):
        cfg = config(grid=(1.0, 2.0))
        rows_inline, _ = run_experiment(cfg, workers=0)
        rows_pool, _ = run_experiment(cfg, workers=2)
        for a, b in zip(rows_inline, rows_pool):
            assert a.p_l_lower == b.p_l_lower and a.sampled_mass == b.sampled_mass

    def test_t2_sweep_entry_point(self):
        cfg = config(sweep_var="t2_star", grid=(21.0, math.inf), shots="fixed:200")
        rows, _ = t2_sweep(cfg, workers=0)
        assert len(rows) == 2
        assert rows[1].baseline_bare == 0.0  # infinite T2: no physical dephasing


class TestCliParsing:
    def test_grid_forms(self):
        assert parse_grid("1,2,4", "t_int") == (1.0, 2.0, 4.0)
        log = parse_grid("log:0.1,10,5", "t_int")
        assert len(log) == 5 and log[0] == pytest.approx(0.1)
        lin = parse_grid("lin:1,3,3", "t_int")
        assert lin == (1.0, 2.0, 3.0)
        assert math.isinf(parse_grid("21,inf", "t2_star")[-1])
        assert len(parse_grid("default", "t_int")) == 20

    def test_sweep_parsing(self):
        var, grid = parse_sweep("t_int=1,2")
        assert var == "t_int" and grid == (1.0, 2.0)
        with pytest.raises(ConfigError):
            parse_sweep("nope=1,2")


class TestCliEndToEnd:
    def test_run_and_artifacts(self, tmp_path):
        code = cli_main([
            "run", "--experiment", "bs-prep", "--sweep", "t_int=2.0",
            "--seed", "3", "--shots", "fixed:2000", "--out", str(tmp_path),
            "--workers", "0"])
        assert code == 0
        rows = parse_csv(tmp_path / "results.csv")
        assert len(rows) == 1 and 0 < rows[0].p_l_upper < 1e-2

    def test_config_error_exit_code(self, tmp_path, capsys):
        code = cli_main([
            "run", "--experiment", "qec-step", "--sweep", "t_int=2,1",
            "--out", str(tmp_path)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_override_exit_code(self, tmp_path):
        code = cli_main([
            "run", "--experiment", "qec-step", "--sweep", "t_int=2.0",
            "--set", "st.nope=3", "--out", str(tmp_path)])
        assert code == 2

    def test_io_error_exit_code(self, tmp_path):
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        code = cli_main([
            "run", "--experiment", "bs-prep", "--sweep", "t_int=2.0",
            "--shots", "fixed:100", "--out", str(target), "--workers", "0"])
        assert code == 3

    def test_dump_subcommands(self, capsys):
        assert cli_main(["dump-code", "surface17"]) == 0
        assert "S_X(2) = X0X1X3X4" in capsys.readouterr().out
        assert cli_main(["dump-circuit", "--encoding", "hybrid"]) == 0
        assert "CZ(" in capsys.readouterr().out

    def test_console_script_entry(self):
        result = subprocess.run(
            [sys.executable, "-m", "qec_spinsim.cli", "dump-code", "bs17"],
            capture_output=True, text=True)
        assert result.returncode == 0
        assert "S_X(1) = X0X1X3X4X6X7" in result.stdout

    def test_worker_env_variable(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QEC_SPINSIM_WORKERS", "1")
        rows, _ = run_experiment(config())
        assert len(rows) == 1


class TestPartialResults:
    def test_partial_marker_in_manifest(self, tmp_path):
        cfg = config(shots="adaptive:base=500,budget=0.02")
        rows, manifest = run_experiment(cfg, out_dir=tmp_path, workers=0)
        assert manifest.get("point.0.partial") == "True"
        assert rows[0].sampled_mass < 1.0
