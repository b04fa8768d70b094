import json
import math
import os

import numpy as np
import pytest
from scipy import stats

from qhahn.errors import ConfigError
from qhahn.harness import (
    EmpiricalDistribution,
    ExperimentConfig,
    TwReference,
    _realized_frame,
    exponent_fit,
    ks_distance,
    lln_check,
    run_tw_experiment,
    verify_all,
)
from qhahn.scaling import coefficients


def base_config(**over):
    data = {
        "q": 0.2, "mu": 0.4, "nu": 0.3, "theta": 0.4,
        "N_list": [64], "replicas": 200, "seed": 99,
    }
    data.update(over)
    return data


class TestConfig:
    def test_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(base_config(bogus=1))

    def test_requires_theta_xor_kappa(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(base_config(kappa=18.0))
        data = base_config()
        del data["theta"]
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)

    def test_kappa_entry_point(self):
        data = base_config()
        kappa = data.pop("theta") and None
        co = coefficients(
            ExperimentConfig.from_dict(base_config()).params, 0.4
        )
        data = base_config()
        del data["theta"]
        data["kappa"] = co.kappa
        cfg = ExperimentConfig.from_dict(data)
        assert cfg.theta == pytest.approx(0.4, abs=1e-8)

    def test_n_list_increasing(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(base_config(N_list=[100, 100]))

    def test_replica_floor(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(base_config(replicas=50))

    def test_condition_flags(self):
        cfg = ExperimentConfig.from_dict(base_config())
        flags = cfg.condition_flags()
        assert flags["munu"] and flags["theta_ok"] and flags["strict_order"]


class TestEmpirical:
    def test_cdf_properties(self):
        emp = EmpiricalDistribution(np.array([3.0, 1.0, 2.0, 2.0]))
        assert emp.n == 4
        assert emp.cdf(0.5) == 0.0
        assert emp.cdf(1.0) == 0.25  # right-continuous
        assert emp.cdf(2.0) == 0.75
        assert emp.cdf(10.0) == 1.0
        xs = np.linspace(0, 4, 41)
        vals = emp.cdf(xs)
        assert np.all(np.diff(vals) >= 0)

    def test_ks_against_scipy(self, rng):
        for _ in range(10):
            samples = rng.normal(size=500)
            mine = ks_distance(samples, stats.norm.cdf)
            ref = stats.kstest(samples, stats.norm.cdf).statistic
            assert mine == pytest.approx(ref, abs=1e-15)


class TestTwReference:
    def test_monotone_and_limits(self, tw_reference):
        xs = np.linspace(-10, 6, 801)
        vals = tw_reference.cdf(xs)
        assert np.all(np.diff(vals) >= -1e-12)
        assert tw_reference.cdf(-12.0) == 0.0
        assert tw_reference.cdf(8.0) == 1.0

    def test_interpolation_error(self, tw_reference):
        from qhahn.fredholm import f_gue

        for x in (-2.345, -0.111, 0.777, 1.993):
            assert abs(float(tw_reference.cdf(x)) - f_gue(x, 60)) < 1e-6

    def test_moments(self, tw_reference):
        assert tw_reference.mean == pytest.approx(-1.771, abs=0.01)
        assert tw_reference.sd == pytest.approx(0.902, abs=0.01)


class TestRealizedFrame:
    def test_flooring(self, fig_coeffs):
        tau_req, tau_int, c_real = _realized_frame(fig_coeffs, 100, 0.0)
        assert tau_int == math.floor(tau_req)
        # tau(N, c_real) reproduces the integer time exactly
        back = fig_coeffs.kappa * 100 + c_real * 100 ** (2.0 / 3.0)
        assert back == pytest.approx(tau_int, abs=1e-9)


class TestTwExperiment:
    def test_small_run_outputs(self, tmp_path, tw_reference, fig_cache):
        cfg = ExperimentConfig.from_dict(
            base_config(N_list=[64], replicas=300, out=str(tmp_path / "run"))
        )
        res = run_tw_experiment(cfg, reference=tw_reference, cache=fig_cache)
        tab = res["per_N"][64]
        assert tab["replicas"] == 300
        assert 0.0 < tab["ks"] < 1.0
        csv_path = tmp_path / "run" / "xi_N64.csv"
        assert csv_path.exists()
        assert (tmp_path / "run" / "summary.json").exists()
        # round trip: recompute the summary stats from the CSV exactly
        rows = csv_path.read_text().strip().splitlines()[1:]
        xs = np.array([int(r.split(",")[1]) for r in rows])
        xi = np.array([float(r.split(",")[2]) for r in rows])
        assert xs.tolist() == tab["X"].tolist()
        assert float(xi.mean()) == tab["mean_xi"]
        assert float(xi.std(ddof=1)) == tab["sd_xi"]

    def test_determinism_byte_identical(self, tmp_path, tw_reference, fig_cache):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            cfg = ExperimentConfig.from_dict(
                base_config(N_list=[48], replicas=150, out=str(out))
            )
            run_tw_experiment(cfg, reference=tw_reference, cache=fig_cache)
        assert (out1 / "xi_N48.csv").read_bytes() == (out2 / "xi_N48.csv").read_bytes()
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()

    def test_x_grid_reporting(self, tw_reference, fig_cache):
        cfg = ExperimentConfig.from_dict(
            base_config(N_list=[64], replicas=400, x_grid=[-1.0, 0.0, 1.0])
        )
        res = run_tw_experiment(cfg, reference=tw_reference, cache=fig_cache)
        grid = res["per_N"][64]["cdf_at_x"]
        assert set(grid) == {"-1.0", "0.0", "1.0"}
        for entry in grid.values():
            assert 0.0 <= entry["empirical"] <= 1.0
            # desk-scale N: empirical and reference agree loosely
            assert abs(entry["empirical"] - entry["reference"]) < 0.25

    def test_centering_at_nonzero_c(self, tw_reference, fig_cache):
        # empirical pin of the c-convention: at c = 1 the rescaled mean
        # must sit near the reference mean (the opposite sign convention
        # misses by more than one unit)
        cfg = ExperimentConfig.from_dict(
            base_config(N_list=[512], replicas=400, c=1.0, seed=77)
        )
        res = run_tw_experiment(cfg, reference=tw_reference, cache=fig_cache)
        tab = res["per_N"][512]
        assert abs(tab["mean_xi"] - tw_reference.mean) < 0.25


class TestLln:
    def test_passes_at_scale(self, fig_cache):
        cfg = ExperimentConfig.from_dict(base_config(N_list=[600], replicas=150))
        res = lln_check(cfg, cache=fig_cache)
        assert res["pass"]
        tab = res["per_N"][600]
        assert tab["gap"] < tab["allowed"]

    def test_target_recomputed_internally(self, fig_cache, fig_params):
        cfg = ExperimentConfig.from_dict(base_config(N_list=[64], replicas=100))
        res = lln_check(cfg, cache=fig_cache)
        co = coefficients(fig_params, 0.4)
        assert res["target"] == pytest.approx(co.f - 1.0, abs=1e-12)

    def test_requires_c_zero(self):
        cfg = ExperimentConfig.from_dict(base_config(c=0.5))
        with pytest.raises(ConfigError):
            lln_check(cfg)


class TestExponentFit:
    def test_synthetic_power_law(self):
        # sd exactly proportional to N^(1/3): slope must come out 1/3
        cfg = ExperimentConfig.from_dict(
            base_config(N_list=[250, 500, 1000, 2000, 4000], replicas=4000)
        )
        rng = np.random.default_rng(0)
        samples = {
            N: rng.normal(scale=N ** (1.0 / 3.0), size=4000)
            for N in cfg.N_list
        }
        res = exponent_fit(cfg, samples_by_n=samples, n_boot=200)
        assert res["slope"] == pytest.approx(1.0 / 3.0, abs=0.02)
        assert res["ci"][0] < res["slope"] < res["ci"][1]
        assert res["r2"] > 0.99

    def test_ci_shrinks_with_replicas(self):
        cfg = ExperimentConfig.from_dict(
            base_config(N_list=[250, 500, 1000, 2000, 4000], replicas=4000)
        )
        rng = np.random.default_rng(1)
        small = {N: rng.normal(scale=N ** (1 / 3), size=500) for N in cfg.N_list}
        big = {N: rng.normal(scale=N ** (1 / 3), size=8000) for N in cfg.N_list}
        r_small = exponent_fit(cfg, samples_by_n=small, n_boot=300)
        r_big = exponent_fit(cfg, samples_by_n=big, n_boot=300)
        w_small = r_small["ci"][1] - r_small["ci"][0]
        w_big = r_big["ci"][1] - r_big["ci"][0]
        assert w_big < w_small

    def test_preconditions(self):
        cfg = ExperimentConfig.from_dict(base_config(N_list=[100, 200, 300]))
        with pytest.raises(ConfigError):
            exponent_fit(cfg)


class TestVerify:
    def test_quick_level_passes(self, tmp_path):
        path = tmp_path / "report.json"
        rep = verify_all("quick", seed=7, report_path=str(path))
        assert rep["pass"]
        assert rep["exit_code"] == 0
        data = json.loads(path.read_text())
        assert data["level"] == "quick"
        assert all(c["pass"] for c in data["checks"])

    def test_report_reproducible_modulo_timestamp(self, tmp_path):
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        verify_all("quick", seed=7, report_path=str(p1))
        verify_all("quick", seed=7, report_path=str(p2))
        d1 = json.loads(p1.read_text())
        d2 = json.loads(p2.read_text())
        d1.pop("timestamp")
        d2.pop("timestamp")
        assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)

    def test_rejects_bad_level(self):
        with pytest.raises(ConfigError):
            verify_all("medium")
