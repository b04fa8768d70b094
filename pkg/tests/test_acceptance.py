"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with its measured quantities (run with -s or -rA to see them all).

The Monte Carlo criteria share one master ensemble (session fixture):
2000 replicas at N in {250, 500, 1000, 4000} and 5000 at N = 2000, all at
the canonical parameter point (q, mu, nu, theta) = (0.2, 0.4, 0.3, 0.4)
with c = 0.  On a single core the ensemble build takes on the order of an
hour; the remaining criteria run in seconds.
"""

import math
import time

import numpy as np
import pytest

from qhahn.asymptotics import (
    ExponentFunctions,
    identity_checks,
    steep_descent_check,
    taylor_check,
)
from qhahn.dynamics import (
    INFINITE,
    jump_weights,
    measure_current,
    simulate_ensemble,
)
from qhahn.fredholm import f_gue, f_gue_via_contour, mellin_barnes_check
from qhahn.harness import (
    ExperimentConfig,
    _realized_frame,
    _xi_from_positions,
    exponent_fit,
    ks_distance,
    run_tw_experiment,
)
from qhahn.qspecial import q_binomial_theorem_check
from qhahn.scaling import ModelParams, coefficients, kpz_quantities, \
    stationary_density_current

SEED = 20_240_801
ENSEMBLE_PLAN = {250: 2000, 500: 2000, 1000: 2000, 2000: 5000, 4000: 2000}


def report(num, name, passed, detail):
    print(f"criterion-{num:02d} {name}: {'PASS' if passed else 'FAIL'} ({detail})",
          flush=True)
    assert passed, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="session")
def ensembles(fig_params, fig_coeffs, fig_cache):
    """Master c=0 ensembles: replica positions X_N(tau_int) keyed by N."""
    out = {}
    for N, reps in ENSEMBLE_PLAN.items():
        t0 = time.time()
        _, tau_int, c_real = _realized_frame(fig_coeffs, N, 0.0)
        xs, tails = simulate_ensemble(fig_params, N, tau_int, SEED, reps,
                                      cache=fig_cache)
        assert tails == 0, "tail-hit counter must stay zero in acceptance runs"
        xi = _xi_from_positions(fig_coeffs, xs.astype(float), N, c_real)
        out[N] = {"X": xs, "xi": xi, "tau": tau_int,
                  "seconds": time.time() - t0}
        print(f"[ensemble] N={N} replicas={reps} tau={tau_int} "
              f"({out[N]['seconds']:.1f} s)", flush=True)
    return out


def test_criterion_01_jump_law_normalization(rng):
    t0 = time.time()
    worst = 0.0
    for _ in range(1000):
        q = rng.uniform(0.05, 0.95)
        nu = rng.uniform(0.0, 0.9)
        mu = min(nu + rng.uniform(1e-3, 0.5), 0.999)
        m = int(rng.integers(0, 51)) if rng.random() < 0.8 else INFINITE
        t = jump_weights(ModelParams(q=q, mu=mu, nu=nu), m)
        worst = max(worst, abs(t.weights.sum() + t.tail_mass - 1.0))
    dt = time.time() - t0
    report(1, "jump-law normalization", worst < 1e-12 and dt < 5.0,
           f"worst |sum-1| = {worst:.2e}, {dt:.2f} s")


def test_criterion_02_q_binomial(rng):
    t0 = time.time()
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(0.0, 0.99)
        z = rng.uniform(0.01, 0.8)
        q = rng.uniform(0.05, 0.8)
        worst = max(worst, q_binomial_theorem_check(a, z, q))
    dt = time.time() - t0
    report(2, "q-binomial residual", worst < 1e-10 and dt < 2.0,
           f"worst residual = {worst:.2e}, {dt:.2f} s")


def test_criterion_03_scaling_identities(fig_params, fig_theta, rng):
    t0 = time.time()
    kq = kpz_quantities(fig_params, fig_theta)
    co = coefficients(fig_params, fig_theta)
    h = 1e-5
    fd = (coefficients(fig_params, fig_theta + h).kappa
          - coefficients(fig_params, fig_theta - h).kappa) / (2 * h)
    pred = -2.0 * co.chi / co.phi_prime
    kappa_rel = abs(fd - pred) / abs(pred)
    chi_min = math.inf
    for _ in range(1000):
        q = rng.uniform(0.05, 0.95)
        nu = rng.uniform(0.01, 0.9)
        mu = min(nu + rng.uniform(1e-3, 0.5), 0.999)
        th = rng.uniform(0.05, 3.0)
        chi_min = min(chi_min, coefficients(ModelParams(q, mu, nu), th).chi)
    dt = time.time() - t0
    ok = kq.coeff_residual < 1e-9 and kappa_rel < 1e-6 and chi_min > 0 and dt < 30
    report(3, "scaling identities",
           ok,
           f"kpz residual = {kq.coeff_residual:.2e}, d(kappa)/d(theta) rel = "
           f"{kappa_rel:.2e}, chi_min = {chi_min:.3e}, {dt:.1f} s")


def test_criterion_04_series_identities(fig_params, fig_coeffs, rng):
    t0 = time.time()
    res = identity_checks(ExponentFunctions(fig_coeffs, fig_params))
    worst_f = res["f_identity_residual"]
    worst_one = res["one_identity_residual"]
    for _ in range(20):
        q = rng.uniform(0.05, 0.45)
        nu = rng.uniform(q, 0.45)
        mu = rng.uniform(nu + 2e-3, 0.5)
        p = ModelParams(q, mu, nu)
        th = rng.uniform(0.05, 0.98 * min(3.0, p.theta_bound))
        r = identity_checks(ExponentFunctions(coefficients(p, th), p))
        worst_f = max(worst_f, r["f_identity_residual"])
        worst_one = max(worst_one, r["one_identity_residual"])
    dt = time.time() - t0
    report(4, "series identities", worst_f < 1e-8 and worst_one < 1e-8 and dt < 10,
           f"worst f-identity = {worst_f:.2e}, worst unit-identity = "
           f"{worst_one:.2e}, {dt:.1f} s")


def test_criterion_05_critical_point(fig_params, fig_coeffs):
    t0 = time.time()
    ef = ExponentFunctions(fig_coeffs, fig_params, c=0.5, x=0.25)
    tc = taylor_check(ef, h=1e-3)
    chi2 = 2.0 * fig_coeffs.chi
    ok = (
        abs(tc["f0_d1"]) < 1e-6 * chi2
        and abs(tc["f0_d2"]) < 1e-6 * chi2
        and tc["f0_d3_residual"] < 1e-6
    )
    dt = time.time() - t0
    report(5, "critical-point structure", ok and dt < 5,
           f"|f0'| = {abs(tc['f0_d1']):.2e}, |f0''| = {abs(tc['f0_d2']):.2e}, "
           f"f0''' rel residual = {tc['f0_d3_residual']:.2e}, {dt:.2f} s")


def test_criterion_06_steep_descent(rng):
    t0 = time.time()
    all_ok = True
    for _ in range(100):
        q = rng.uniform(0.05, 0.45)
        nu = rng.uniform(q, 0.45)
        mu = rng.uniform(nu + 2e-3, 0.5)
        p = ModelParams(q, mu, nu)
        th = rng.uniform(0.05, 0.98 * min(3.0, p.theta_bound))
        ef = ExponentFunctions(coefficients(p, th), p)
        for contour in ("C", "D"):
            prof = steep_descent_check(ef, contour, 4096)
            all_ok = all_ok and prof.monotone and prof.max_at_zero
    dt = time.time() - t0
    report(6, "steep descent sweep", all_ok and dt < 60,
           f"100 parameter sets x 2 contours at grid 4096, {dt:.1f} s")


def test_criterion_07_stationary_measure(fig_params, fig_theta):
    t0 = time.time()
    alpha = fig_params.q**fig_theta
    rho, j = stationary_density_current(fig_params, alpha)
    res = measure_current(fig_params, alpha, n_sites=1500, n_steps=100,
                          seed=SEED, n_replicas=16)
    rho_dev = abs(res["rho_hat"] - rho) / res["stderr_rho"]
    j_dev = abs(res["j_hat"] - j) / res["stderr_j"]
    dt = time.time() - t0
    ok = res["site_steps"] >= 10**5 and rho_dev < 3 and j_dev < 3 and dt < 60
    report(7, "stationary density/current", ok,
           f"site-steps = {res['site_steps']}, rho dev = {rho_dev:.2f} sigma, "
           f"current dev = {j_dev:.2f} sigma, {dt:.1f} s")


def test_criterion_08_lln(fig_params, fig_theta, fig_cache):
    t0 = time.time()
    cfg = ExperimentConfig.from_dict({
        "q": fig_params.q, "mu": fig_params.mu, "nu": fig_params.nu,
        "theta": fig_theta, "N_list": [2000], "replicas": 100, "seed": SEED,
    })
    from qhahn.harness import lln_check

    res = lln_check(cfg, cache=fig_cache)
    tab = res["per_N"][2000]
    dt = time.time() - t0
    report(8, "law of large numbers", res["pass"] and dt < 600,
           f"|mean - (f-1)| = {tab['gap']:.5f} < allowed {tab['allowed']:.5f}, "
           f"{dt:.1f} s")


def test_criterion_09_fluctuation_exponent(fig_params, fig_theta, ensembles):
    t0 = time.time()
    cfg = ExperimentConfig.from_dict({
        "q": fig_params.q, "mu": fig_params.mu, "nu": fig_params.nu,
        "theta": fig_theta, "N_list": sorted(ENSEMBLE_PLAN), "replicas": 2000,
        "seed": SEED,
    })
    samples = {N: ensembles[N]["X"] for N in sorted(ENSEMBLE_PLAN)}
    res = exponent_fit(cfg, samples_by_n=samples)
    dt = time.time() - t0
    ok = 0.25 <= res["slope"] <= 0.42
    report(9, "fluctuation exponent", ok,
           f"slope = {res['slope']:.4f} in [0.25, 0.42], bootstrap CI = "
           f"({res['ci'][0]:.4f}, {res['ci'][1]:.4f}), r2 = {res['r2']:.4f}, "
           f"fit {dt:.1f} s")


def test_criterion_10_tracy_widom_limit(tw_reference, ensembles):
    t0 = time.time()
    ks = {N: ks_distance(ensembles[N]["xi"], tw_reference.cdf)
          for N in (250, 1000, 2000, 4000)}
    mean_gap = abs(float(ensembles[2000]["xi"].mean()) - tw_reference.mean)
    ok_ks = ks[2000] <= 0.10
    ok_mono = ks[1000] <= 1.2 * ks[250] and ks[4000] <= 1.2 * ks[1000]
    ok_mean = mean_gap <= 0.15
    dt = time.time() - t0
    report(10, "Tracy-Widom limit", ok_ks and ok_mono and ok_mean,
           f"KS(2000; 5000 reps) = {ks[2000]:.4f} <= 0.10, KS chain "
           f"{ks[250]:.4f} -> {ks[1000]:.4f} -> {ks[4000]:.4f} (20% slack), "
           f"|mean xi - tw mean| = {mean_gap:.4f} <= 0.15, {dt:.1f} s")


def test_criterion_11_f_gue_engine(fig_coeffs):
    t0 = time.time()
    worst_dual = 0.0
    for x in np.arange(-5.0, 2.01, 0.5):
        worst_dual = max(worst_dual, abs(f_gue(float(x), 120) - f_gue(float(x), 60)))
    xs = np.arange(-10.0, 6.01, 0.25)
    fs = np.array([f_gue(float(x), 60) for x in xs])
    monotone = bool(np.all(np.diff(fs) > -1e-12))
    limits = fs[0] < 1e-6 and fs[-1] > 1 - 1e-10
    worst_chain = 0.0
    worst_c = 0.0
    for x in (-3.0, -1.0, 0.0, 1.0, 2.0):
        ref = f_gue(x, 120)
        v0 = f_gue_via_contour(x, 0.0, fig_coeffs, order=60)
        v15 = f_gue_via_contour(x, 1.5, fig_coeffs, order=60)
        worst_chain = max(worst_chain, abs(v0 - ref))
        worst_c = max(worst_c, abs(v0 - v15))
    dt = time.time() - t0
    ok = (worst_dual < 1e-8 and monotone and limits and worst_chain < 1e-6
          and worst_c < 1e-8 and dt < 300)
    report(11, "Tracy-Widom engine", ok,
           f"dual-order gap = {worst_dual:.2e}, contour-chain gap = "
           f"{worst_chain:.2e}, c-dependence = {worst_c:.2e}, monotone = "
           f"{monotone}, {dt:.1f} s")


def test_criterion_12_finite_time_identity(fig_params):
    t0 = time.time()
    gaps = {}
    for (n, tau, tol) in ((1, 0, 1e-6), (1, 5, 1e-6), (2, 3, 1e-5)):
        res = mellin_barnes_check(fig_params, n, tau, -0.7)
        gaps[(n, tau)] = (res["gap"], tol)
    dt = time.time() - t0
    ok = all(g < tol for g, tol in gaps.values()) and dt < 120
    detail = ", ".join(
        f"N={n} tau={tau}: {g:.2e} < {tol:g}" for (n, tau), (g, tol) in gaps.items()
    )
    report(12, "finite-time determinant identity", ok, f"{detail}, {dt:.1f} s")


def test_criterion_13_determinism(tmp_path, fig_params, fig_theta,
                                  tw_reference, fig_cache):
    t0 = time.time()
    outputs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        cfg = ExperimentConfig.from_dict({
            "q": fig_params.q, "mu": fig_params.mu, "nu": fig_params.nu,
            "theta": fig_theta, "N_list": [64, 96], "replicas": 150,
            "seed": SEED, "out": str(out),
        })
        run_tw_experiment(cfg, reference=tw_reference, cache=fig_cache)
        outputs.append(out)
    same = all(
        (outputs[0] / f).read_bytes() == (outputs[1] / f).read_bytes()
        for f in ("xi_N64.csv", "xi_N96.csv", "summary.json")
    )
    dt = time.time() - t0
    report(13, "determinism", same, f"reruns byte-identical, {dt:.1f} s")
