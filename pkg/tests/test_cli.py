"""Command-line contract tests: files, determinism, exit codes, runtime."""

import time

from stapbench import cli


def read(path):
    return path.read_bytes()


TOY_SCENE = """
num_sensors = 2
num_pulses = 2
clutter_patches = 31
cnr_db = 20
jammers = none

[experiment]
kind = sinr-vs-snapshots
algorithms = optimal, smi, lr-jio
k_max = 16
k_grid = 8, 16
runs = 2
seed = 4
"""


class TestComplexityRun:
    def test_row_count_contract(self, tmp_path, capsys):
        cfg_path = tmp_path / "c.cfg"
        cfg_path.write_text("[experiment]\nkind = complexity\nalgorithms = smi, lr-jidf\nm_grid = 32, 64\n")
        out = tmp_path / "out"
        assert cli.main(["--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "complexity.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2  # header + |algorithms| * |m_grid|
        summary = capsys.readouterr().out
        assert "complexity" in summary and "smi" in summary


class TestDeterminism:
    def test_same_seed_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "s.cfg"
        cfg_path.write_text(TOY_SCENE)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert cli.main(["--config", str(cfg_path), "--out", str(out1)]) == 0
        assert cli.main(["--config", str(cfg_path), "--out", str(out2)]) == 0
        name = "sinr-vs-snapshots.csv"
        assert read(out1 / name) == read(out2 / name)
        for alg in ("optimal", "smi", "lr-jio"):
            dat = f"sinr-vs-snapshots_{alg}.dat"
            assert read(out1 / dat) == read(out2 / dat)

    def test_thread_count_does_not_change_output(self, tmp_path):
        cfg_path = tmp_path / "s.cfg"
        cfg_path.write_text(TOY_SCENE)
        out1, out2 = tmp_path / "t1", tmp_path / "t4"
        assert cli.main(["--config", str(cfg_path), "--out", str(out1), "--threads", "1"]) == 0
        assert cli.main(["--config", str(cfg_path), "--out", str(out2), "--threads", "4"]) == 0
        assert read(out1 / "sinr-vs-snapshots.csv") == read(out2 / "sinr-vs-snapshots.csv")


class TestSmokeRuntime:
    def test_toy_snapshot_sweep_is_fast(self, tmp_path):
        cfg_path = tmp_path / "s.cfg"
        cfg_path.write_text(TOY_SCENE)
        start = time.monotonic()
        assert cli.main(["--config", str(cfg_path), "--out", str(tmp_path / "out")]) == 0
        assert time.monotonic() - start < 5.0


class TestExitCodes:
    def test_validation_failure_is_two(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text("num_sensors = 0\n")
        assert cli.main(["--config", str(cfg_path)]) == 2
        assert "num_sensors" in capsys.readouterr().err

    def test_missing_config_is_two(self, tmp_path):
        assert cli.main(["--config", str(tmp_path / "absent.cfg")]) == 2

    def test_bad_experiment_override_is_two(self, tmp_path):
        cfg_path = tmp_path / "ok.cfg"
        cfg_path.write_text("")
        assert cli.main(["--config", str(cfg_path), "--experiment", "nonsense"]) == 2

    def test_seed_env_fallback(self, tmp_path, monkeypatch):
        cfg_path = tmp_path / "c.cfg"
        cfg_path.write_text(TOY_SCENE.replace("seed = 4\n", ""))
        monkeypatch.setenv("STAP_BENCH_SEED", "12")
        out1, out2 = tmp_path / "e1", tmp_path / "e2"
        assert cli.main(["--config", str(cfg_path), "--out", str(out1)]) == 0
        monkeypatch.setenv("STAP_BENCH_SEED", "13")
        assert cli.main(["--config", str(cfg_path), "--out", str(out2)]) == 0
        assert read(out1 / "sinr-vs-snapshots.csv") != read(out2 / "sinr-vs-snapshots.csv")

    def test_numeric_budget_exit_is_three(self, tmp_path, monkeypatch, capsys):
        from stapbench import evaluation as ev
        from stapbench.linalg import NumericalError

        real = ev.design_algorithm

        def flaky(name, ctx, r_hat, block):
            if name == "smi":
                raise NumericalError("injected")
            return real(name, ctx, r_hat, block)

        monkeypatch.setattr(ev, "design_algorithm", flaky)
        cfg_path = tmp_path / "c.cfg"
        cfg_path.write_text(TOY_SCENE)
        assert cli.main(["--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 3
        assert "budget" in capsys.readouterr().err
