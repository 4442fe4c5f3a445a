"""Metric, detection and experiment-runner tests."""

import math

import numpy as np
import pytest

from stapbench import beamformers as bf
from stapbench import evaluation as ev
from stapbench import scene
from stapbench.linalg import NumericalError


def noise_only_cfg(**overrides):
    base = dict(num_sensors=2, num_pulses=2, cnr_db=None, jammers=())
    base.update(overrides)
    return scene.RadarConfig(**base)


class TestSinr:
    def test_matched_filter_in_white_noise(self):
        s = np.array([1.0, 0.0])
        # xi_t * M = 1
        assert ev.sinr(s, np.eye(2), s, xi_t=0.5) == pytest.approx(0.0, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        r = np.diag([1.0, 2.0, 5.0])
        s = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        base = ev.sinr(w, r, s, 1.0)
        for c in (2.0, -3.0, 1j, 0.25 - 0.33j):
            assert ev.sinr(c * w, r, s, 1.0) == pytest.approx(base, abs=1e-12)

    def test_mvdr_closed_form(self):
        r = np.diag([1.0, 2.0])
        s = np.array([1.0, 1.0]) / np.sqrt(2)
        w = bf.mvdr_weights(r, s)
        # optimal SINR with xi_t*M = 1 is s^H R^-1 s = 0.75
        assert ev.sinr(w, r, s, xi_t=0.5) == pytest.approx(10 * math.log10(0.75), abs=1e-10)

    def test_accepts_covariance_set(self):
        cfg = noise_only_cfg()
        cov = scene.total_covariance(cfg)
        s = scene.target_steering(cfg, scene.TargetSpec(0.0, 0.0, 0.0))
        assert ev.sinr(s, cov, s, 1.0 / cfg.size) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_weight_rejected(self):
        with pytest.raises(NumericalError):
            ev.sinr(np.zeros(2), np.eye(2), np.ones(2), 1.0)


class TestDetectionThreshold:
    def test_always_detect(self):
        assert ev.detection_threshold(np.ones(2), np.eye(2), 1.0) == pytest.approx(0.0)

    def test_unit_case(self):
        w = np.array([1.0, 0.0])
        assert ev.detection_threshold(w, np.eye(2), math.exp(-1)) == pytest.approx(1.0)

    def test_formula(self):
        w = np.array([np.sqrt(2.0), 0.0])  # mean output power 2
        expect = 2.0 * math.log(1e6)
        assert ev.detection_threshold(w, np.eye(2), 1e-6) == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(27.631, abs=1e-3)


class TestPdAnalytic:
    def test_no_target_energy(self):
        assert ev.pd_analytic(0.0, 1e-3) == pytest.approx(1e-3)

    def test_formula(self):
        assert ev.pd_analytic(10.0, 1e-6) == pytest.approx(10 ** (-6.0 / 11.0), rel=1e-12)
        assert ev.pd_analytic(10.0, 1e-6) == pytest.approx(0.285, abs=5e-4)

    def test_asymptote(self):
        assert ev.pd_analytic(1e9, 1e-6) > 0.99998

    def test_monotone_in_sinr_and_pfa(self):
        grid = np.linspace(0.0, 50.0, 40)
        values = [ev.pd_analytic(v, 1e-4) for v in grid]
        assert all(b > a for a, b in zip(values, values[1:]))
        pfas = [1e-6, 1e-4, 1e-2, 1e-1]
        values = [ev.pd_analytic(5.0, p) for p in pfas]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestMultiplicationCount:
    def test_smi_hand_case(self):
        assert ev.multiplication_count("smi", 2, k_snapshots=1) == 18

    def test_nondecreasing_in_m(self):
        for name in ("smi", "lr-evd", "lr-krylov", "lr-jio", "lr-jidf", "sa-mvdr", "ka-mvdr"):
            counts = [
                ev.multiplication_count(name, m, d=6, b=8, i_len=8) for m in (16, 32, 64, 128)
            ]
            assert all(b > a for a, b in zip(counts, counts[1:])), name

    def test_jidf_below_smi_at_table_size(self):
        jidf = ev.multiplication_count("lr-jidf", 64, d=6, b=8, i_len=8, k_snapshots=800)
        smi = ev.multiplication_count("smi", 64, k_snapshots=800)
        assert jidf < smi

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            ev.multiplication_count("dft", 8)


class TestAdaptiveRank:
    def test_budget_rule(self):
        assert ev.adaptive_rank(25, 64) == 6  # floor at the small-rank default
        assert ev.adaptive_rank(100, 64) == 20
        assert ev.adaptive_rank(200, 64) == 40
        assert ev.adaptive_rank(800, 64) == 64  # capped at the dimension


class TestSinrVsSnapshots:
    def test_optimal_bound_is_flat_and_dominant(self):
        cfg = scene.RadarConfig(
            num_sensors=3, num_pulses=2, cnr_db=30.0,
            jammers=(scene.JammerSpec(-20.0, 30.0),), clutter_patches=61,
        )
        result = ev.run_sinr_vs_snapshots(
            cfg, ["optimal", "smi", "lr-jio"], k_max=48, runs=3, seed=5,
            k_grid=(12, 24, 48),
        )
        optimal = [p.sinr_db for p in result.curves["optimal"]]
        assert max(optimal) - min(optimal) < 1e-9
        for name in ("smi", "lr-jio"):
            for p, bound in zip(result.curves[name], optimal):
                assert p.sinr_db <= bound + 1e-9

    def test_deterministic_given_seed(self):
        cfg = noise_only_cfg(num_sensors=2, num_pulses=2)
        kwargs = dict(k_max=16, runs=2, seed=9, k_grid=(8, 16))
        a = ev.run_sinr_vs_snapshots(cfg, ["smi"], **kwargs)
        b = ev.run_sinr_vs_snapshots(cfg, ["smi"], **kwargs)
        assert [p.sinr_db for p in a.curves["smi"]] == [p.sinr_db for p in b.curves["smi"]]

    def test_workers_do_not_change_results(self):
        cfg = noise_only_cfg()
        kwargs = dict(k_max=16, runs=4, seed=9, k_grid=(8, 16))
        serial = ev.run_sinr_vs_snapshots(cfg, ["smi"], **kwargs, workers=1)
        threaded = ev.run_sinr_vs_snapshots(cfg, ["smi"], **kwargs, workers=4)
        assert [p.sinr_db for p in serial.curves["smi"]] == [
            p.sinr_db for p in threaded.curves["smi"]
        ]

    def test_failure_accounting(self, monkeypatch):
        cfg = noise_only_cfg(num_sensors=2, num_pulses=2)
        real = ev.design_algorithm

        def flaky(name, ctx, r_hat, block):
            if name == "smi":
                raise NumericalError("injected failure")
            return real(name, ctx, r_hat, block)

        monkeypatch.setattr(ev, "design_algorithm", flaky)
        result = ev.run_sinr_vs_snapshots(
            cfg, ["smi", "optimal"], k_max=8, runs=2, seed=1, k_grid=(8,)
        )
        assert result.failures["smi"] == 2
        assert result.failures["optimal"] == 0
        assert result.curves["smi"][0].run_count == 0
        assert result.curves["optimal"][0].run_count == 2


class TestSinrVsDoppler:
    def test_noise_only_curve_is_flat(self):
        cfg = noise_only_cfg(num_sensors=2, num_pulses=4, prf_hz=300.0)
        result = ev.run_sinr_vs_doppler(
            cfg, ["optimal"], doppler_grid=np.arange(-100.0, 101.0, 25.0),
            k_train=32, runs=1, seed=3,
        )
        values = [p.sinr_db for p in result.curves["optimal"]]
        assert max(values) - min(values) < 1e-9

    def test_clutter_notch_at_ridge(self):
        result = ev.run_sinr_vs_doppler(
            scene.RadarConfig(), ["optimal"], doppler_grid=np.arange(-100.0, 101.0, 5.0),
            k_train=64, runs=1, seed=3,
        )
        points = result.curves["optimal"]
        fds = [p.doppler_hz for p in points]
        values = [p.sinr_db for p in points]
        assert abs(fds[int(np.argmin(values))]) <= 5.0

    def test_optimal_curve_symmetry(self):
        result = ev.run_sinr_vs_doppler(
            scene.RadarConfig(), ["optimal"], doppler_grid=np.arange(-100.0, 101.0, 5.0),
            k_train=64, runs=1, seed=4,
        )
        values = [p.sinr_db for p in result.curves["optimal"]]
        for left, right in zip(values, values[::-1]):
            assert abs(left - right) <= 0.5


@pytest.fixture(scope="module")
def small_pd():
    cfg = scene.RadarConfig(
        num_sensors=3, num_pulses=2, cnr_db=20.0,
        jammers=(scene.JammerSpec(40.0, 20.0),), clutter_patches=61,
    )
    result = ev.run_pd_vs_snr(
        cfg, ["optimal", "smi"], snr_grid_db=np.arange(-10.0, 21.0, 2.0),
        k_train=24, trials=60_000, pfa=1e-2, seed=11, designs=6,
    )
    return cfg, result


class TestPdVsSnr:
    def test_low_snr_matches_false_alarm_rate(self, small_pd):
        _, result = small_pd
        first = result.curves["optimal"][0]
        se = math.sqrt(1e-2 * (1 - 1e-2) / first.trials)
        assert abs(first.pd - 1e-2) <= 4 * se + 2e-3

    def test_pd_nondecreasing_within_noise(self, small_pd):
        _, result = small_pd
        for name in ("optimal", "smi"):
            values = [p.pd for p in result.curves[name]]
            for a, b in zip(values, values[1:]):
                assert b >= a - 0.01

    def test_optimal_matches_analytic(self, small_pd):
        cfg, result = small_pd
        cov = scene.total_covariance(cfg)
        s = scene.target_steering(cfg, scene.TargetSpec())
        w = bf.mvdr_weights(cov.r_total, s)
        for point in result.curves["optimal"]:
            xi = cfg.noise_power * 10 ** (point.snr_db / 10.0)
            sinr_lin = 10 ** (ev.sinr(w, cov, s, xi) / 10.0)
            expect = ev.pd_analytic(sinr_lin, point.pfa_target)
            se = math.sqrt(max(expect * (1 - expect), 1e-12) / point.trials)
            assert abs(point.pd - expect) <= 3 * se + 1e-3, point.snr_db

    def test_deterministic(self, small_pd):
        cfg, result = small_pd
        again = ev.run_pd_vs_snr(
            cfg, ["optimal", "smi"], snr_grid_db=np.arange(-10.0, 21.0, 2.0),
            k_train=24, trials=60_000, pfa=1e-2, seed=11, designs=6,
        )
        assert [p.pd for p in again.curves["smi"]] == [p.pd for p in result.curves["smi"]]


class TestEmpiricalFalseAlarm:
    def test_threshold_calibration(self):
        # direct check of the square-law threshold at a testable rate
        cfg = scene.RadarConfig(
            num_sensors=2, num_pulses=2, cnr_db=10.0, jammers=(), clutter_patches=31
        )
        cov = scene.total_covariance(cfg)
        s = scene.target_steering(cfg, scene.TargetSpec(0.0, 60.0, 0.0))
        w = bf.mvdr_weights(cov.r_total, s)
        pfa = 1e-2
        threshold = ev.detection_threshold(w, cov, pfa)
        rng = np.random.default_rng(17)
        n = 1_000_000
        outputs = w.w.conj() @ scene.draw_interference_block(cov, n, rng)
        rate = float((np.abs(outputs) ** 2 > threshold).mean())
        se = math.sqrt(pfa * (1 - pfa) / n)
        assert abs(rate - pfa) <= 3 * se


class TestComplexitySweep:
    def test_row_counts(self):
        result = ev.run_complexity_sweep(["smi", "lr-jidf"], m_grid=(32, 64))
        rows = list(result.rows())
        assert len(rows) == 4

    def test_fast_methods_below_cubic_methods(self):
        algorithms = ["smi", "lr-evd", "lr-krylov", "lr-jidf", "sa-mvdr", "ka-mvdr"]
        result = ev.run_complexity_sweep(algorithms, m_grid=(32, 64, 128, 256))
        by_alg = {
            name: [p.multiplications for p in points]
            for name, points in result.curves.items()
        }
        for fast in ("lr-jidf", "lr-krylov"):
            for slow in ("smi", "lr-evd", "sa-mvdr", "ka-mvdr"):
                for cheap, costly in zip(by_alg[fast], by_alg[slow]):
                    assert cheap < costly, (fast, slow)

    def test_smi_scaling_is_cubic(self):
        result = ev.run_complexity_sweep(["smi"], m_grid=(256, 512, 1024, 2048))
        counts = [p.multiplications for p in result.curves["smi"]]
        ratios = [b / a for a, b in zip(counts, counts[1:])]
        assert all(abs(r - 8.0) < 0.6 for r in ratios)
