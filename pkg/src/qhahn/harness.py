"""Experiment orchestration and statistics.

Seeded replica ensembles of the particle system, empirical distributions of
the rescaled tagged-particle position, Kolmogorov-Smirnov distance against
the Tracy-Widom reference, law-of-large-numbers and fluctuation-exponent
checks, and the one-command verification suite.

Discrete time: the scaling map's tau(N, c) is floored to an integer step
count; the experiment then reports the realized pair (tau_int, c_real)
with c_real = (tau_int - kappa N) / N^(2/3), so that tau(N, c_real) =
tau_int exactly and the rescaling can be applied verbatim at the realized
frame (the limit statement holds for every fixed c).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import fredholm
from .dynamics import JumpTableCache, simulate_ensemble, measure_current
from .errors import ConfigError
from .qspecial import QSeriesConfig, q_binomial_theorem_check, q_digamma, q_gamma
from .scaling import (
    ModelParams,
    coefficients,
    kpz_quantities,
    stationary_density_current,
    theta_from_kappa,
)

__all__ = [
    "ExperimentConfig",
    "EmpiricalDistribution",
    "ks_distance",
    "TwReference",
    "run_tw_experiment",
    "lln_check",
    "exponent_fit",
    "verify_all",
]


# ---------------------------------------------------------------------------
# configuration


_CONFIG_KEYS = {
    "q", "mu", "nu", "theta", "kappa", "c", "x_grid", "N_list", "replicas",
    "seed", "out", "tolerances", "workers", "tw_order",
}


@dataclass
class ExperimentConfig:
    params: ModelParams
    theta: float
    c: float = 0.0
    x_grid: list = field(default_factory=list)
    N_list: list = field(default_factory=lambda: [250, 1000, 4000])
    replicas: int = 1000
    seed: int = 0
    out: str | None = None
    tolerances: dict = field(default_factory=dict)
    workers: int | None = None
    tw_order: int = 60

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("q", "mu", "nu", "N_list", "replicas", "seed"):
            if key not in data:
                raise ConfigError(f"missing config key: {key}")
        if ("theta" in data) == ("kappa" in data):
            raise ConfigError("provide exactly one of theta / kappa")
        params = ModelParams(q=data["q"], mu=data["mu"], nu=data["nu"])
        theta = (
            data["theta"]
            if "theta" in data
            else theta_from_kappa(params, data["kappa"])
        )
        n_list = list(data["N_list"])
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ConfigError("N_list must be strictly increasing")
        replicas = int(data["replicas"])
        if replicas < 100:
            raise ConfigError("statistical subcommands need replicas >= 100")
        return cls(
            params=params,
            theta=float(theta),
            c=float(data.get("c", 0.0)),
            x_grid=list(data.get("x_grid", [])),
            N_list=n_list,
            replicas=replicas,
            seed=int(data["seed"]),
            out=data.get("out"),
            tolerances=dict(data.get("tolerances", {})),
            workers=data.get("workers"),
            tw_order=int(data.get("tw_order", 60)),
        )

    def condition_flags(self) -> dict:
        p = self.params
        return {
            "strict_order": p.strict_order,
            "munu": p.cond_munu,
            "theta_bound": p.theta_bound,
            "theta_ok": p.theta_ok(self.theta),
        }


# ---------------------------------------------------------------------------
# empirical distributions and KS distance


@dataclass
class EmpiricalDistribution:
    """Sorted sample with right-continuous empirical CDF."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))

    @property
    def n(self) -> int:
        return len(self.samples)

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.n


def ks_distance(samples: np.ndarray, reference_cdf) -> float:
    """sup_x |F_hat(x) - F(x)| for a continuous reference CDF: attained at
    sample points, max of the two one-sided gaps."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = len(xs)
    fs = np.asarray(reference_cdf(xs), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - fs)
    lower = np.max(fs - np.arange(0, n) / n)
    return float(max(upper, lower))


class TwReference:
    """Tracy-Widom GUE reference: table on [-10, 6] step 0.01 with
    monotone cubic interpolation (interpolation error below 1e-6, folded
    into the KS budgets); clamped to {0, 1} outside the table."""

    def __init__(self, order: int = 60, cache_dir: str | None = None):
        xs, fs = fredholm.tw_cdf_table(order=order, cache_dir=cache_dir)
        self.xs = xs
        self.fs = fs
        self._interp = PchipInterpolator(xs, fs, extrapolate=False)
        self.mean, self.sd = fredholm.tw_mean_sd(xs, fs)
        self.order = order

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = self._interp(np.clip(x, self.xs[0], self.xs[-1]))
        out = np.where(x < self.xs[0], 0.0, out)
        out = np.where(x > self.xs[-1], 1.0, out)
        return out


# ---------------------------------------------------------------------------
# experiments


def _realized_frame(co, N: int, c: float):
    """Floor tau(N,c) to an integer and return (tau_int, c_real) with
    tau(N, c_real) = tau_int exactly."""
    tau_req = co.kappa * N + c * N ** (2.0 / 3.0)
    tau_int = int(math.floor(tau_req))
    c_real = (tau_int - co.kappa * N) / N ** (2.0 / 3.0)
    return tau_req, tau_int, c_real


def _xi_from_positions(co, xs: np.ndarray, N: int, c_real: float):
    from .scaling import scaling_maps

    maps = scaling_maps(co, N, c_real, 0.0)
    denom = co.chi ** (1.0 / 3.0) * float(N) ** (1.0 / 3.0) / co.log_q
    return (xs - maps.p) / denom


def run_tw_experiment(config: ExperimentConfig, reference: TwReference | None = None,
                      cache: JumpTableCache | None = None) -> dict:
    """Simulate the ensemble at every N in the config, rescale positions
    and compare against the Tracy-Widom reference.

    Returns {"per_N": {N: {...}}, "conditions": {...}}; each per-N table
    carries the replica positions, xi samples, mean, sd, KS distance,
    requested and realized tau.  When config.out is set, per-N CSVs are
    flushed as soon as that N finishes plus a summary.json at the end.
    """
    if config.workers:
        import numba

        numba.set_num_threads(config.workers)
    reference = reference or TwReference(order=config.tw_order)
    cache = cache or JumpTableCache(config.params)
    co = coefficients(config.params, config.theta)
    out = {"per_N": {}, "conditions": config.condition_flags(),
           "seed": config.seed, "c": config.c}
    if config.out:
        os.makedirs(config.out, exist_ok=True)
    for N in config.N_list:
        tau_req, tau_int, c_real = _realized_frame(co, N, config.c)
        xs, tails = simulate_ensemble(
            config.params, N, tau_int, config.seed, config.replicas, cache=cache
        )
        xi = _xi_from_positions(co, xs.astype(float), N, c_real)
        ks = ks_distance(xi, reference.cdf)
        table = {
            "N": N,
            "tau_requested": tau_req,
            "tau_realized": tau_int,
            "c_requested": config.c,
            "c_realized": c_real,
            "replicas": config.replicas,
            "mean_xi": float(xi.mean()),
            "sd_xi": float(xi.std(ddof=1)),
            "mean_X": float(xs.mean()),
            "sd_X": float(xs.std(ddof=1)),
            "ks": ks,
            "tail_hits": tails,
            "X": xs,
            "xi": xi,
        }
        if config.x_grid:
            emp = EmpiricalDistribution(xi)
            table["cdf_at_x"] = {
                repr(float(x)): {
                    "empirical": float(emp.cdf(float(x))),
                    "reference": float(reference.cdf(float(x))),
                }
                for x in config.x_grid
            }
        out["per_N"][N] = table
        if config.out:
            _write_xi_csv(os.path.join(config.out, f"xi_N{N}.csv"), xs, xi)
    out["tw_mean"] = reference.mean
    out["tw_sd"] = reference.sd
    if config.out:
        _write_summary(os.path.join(config.out, "summary.json"), config, out)
    return out


def _write_xi_csv(path: str, xs: np.ndarray, xi: np.ndarray):
    with open(path, "w") as fh:
        fh.write("replica,X_N,xi\n")
        for r, (x, v) in enumerate(zip(xs, xi)):
            fh.write(f"{r},{int(x)},{float(v)!r}\n")


def _write_summary(path: str, config: ExperimentConfig, result: dict):
    from . import __version__

    payload = {
        "version": __version__,
        "seed": config.seed,
        "c": config.c,
        "params": {"q": config.params.q, "mu": config.params.mu,
                   "nu": config.params.nu, "theta": config.theta},
        "conditions": result["conditions"],
        "tw_mean": result["tw_mean"],
        "tw_sd": result["tw_sd"],
        "per_N": {
            str(N): {k: v for k, v in tab.items() if k not in ("X", "xi")}
            for N, tab in result["per_N"].items()
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def lln_check(config: ExperimentConfig, cache: JumpTableCache | None = None) -> dict:
    """Law of large numbers at c = 0: per N, the ensemble mean of X_N/N
    must match f - 1 within 3 standard errors plus the fluctuation-scale
    allowance 2 |chi^(1/3)/log q| N^(-2/3)."""
    if config.c != 0.0:
        raise ConfigError("lln_check requires c = 0")
    cache = cache or JumpTableCache(config.params)
    co = coefficients(config.params, config.theta)
    target = co.f - 1.0
    allowance_scale = 2.0 * abs(co.chi ** (1.0 / 3.0) / co.log_q)
    per_n = {}
    ok = True
    for N in config.N_list:
        _, tau_int, _ = _realized_frame(co, N, 0.0)
        xs, _tails = simulate_ensemble(
            config.params, N, tau_int, config.seed, config.replicas, cache=cache
        )
        ratio = xs / N
        se = float(ratio.std(ddof=1) / math.sqrt(len(ratio)))
        gap = abs(float(ratio.mean()) - target)
        allowed = 3.0 * se + allowance_scale * N ** (-2.0 / 3.0)
        passed = bool(gap < allowed)
        ok = ok and passed
        per_n[N] = {
            "mean": float(ratio.mean()),
            "target": target,
            "gap": gap,
            "allowed": allowed,
            "se": se,
            "pass": passed,
        }
    return {"per_N": per_n, "target": target, "pass": ok}


def exponent_fit(config: ExperimentConfig, samples_by_n: dict | None = None,
                 n_boot: int = 1000) -> dict:
    """Least-squares slope of log sd(X_N) against log N, with a bootstrap
    confidence interval (replica resampling within each N)."""
    n_list = config.N_list
    if len(n_list) < 4 or n_list[-1] < 10 * n_list[0]:
        raise ConfigError("need >= 4 values of N spanning at least a decade")
    if config.replicas < 2000 and samples_by_n is None:
        raise ConfigError("exponent fit needs >= 2000 replicas per N")
    if samples_by_n is None:
        cache = JumpTableCache(config.params)
        co = coefficients(config.params, config.theta)
        samples_by_n = {}
        for N in n_list:
            _, tau_int, _ = _realized_frame(co, N, 0.0)
            xs, _ = simulate_ensemble(
                config.params, N, tau_int, config.seed, config.replicas,
                cache=cache,
            )
            samples_by_n[N] = xs
    logn = np.log([float(N) for N in n_list])
    logsd = np.log([samples_by_n[N].std(ddof=1) for N in n_list])
    slope, intercept = np.polyfit(logn, logsd, 1)
    fitted = slope * logn + intercept
    ss_res = float(((logsd - fitted) ** 2).sum())
    ss_tot = float(((logsd - logsd.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    rng = np.random.default_rng(config.seed + 12345)
    slopes = np.empty(n_boot)
    for b in range(n_boot):
        ls = []
        for N in n_list:
            xs = samples_by_n[N]
            idx = rng.integers(0, len(xs), len(xs))
            ls.append(math.log(xs[idx].std(ddof=1)))
        slopes[b] = np.polyfit(logn, ls, 1)[0]
    lo, hi = np.percentile(slopes, [2.5, 97.5])
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r2": r2,
        "ci": (float(lo), float(hi)),
        "sd_by_N": {int(N): float(samples_by_n[N].std(ddof=1)) for N in n_list},
    }


# ---------------------------------------------------------------------------
# verification suite


def _check(name: str, kind: str, passed: bool, details: dict) -> dict:
    return {"name": name, "kind": kind, "pass": bool(passed), **details}


def _verify_qspecial(params: ModelParams, rng: np.random.Generator) -> list:
    checks = []
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(0.0, 0.99)
        z = rng.uniform(0.01, 0.95)
        q = rng.uniform(0.05, 0.9)
        worst = max(worst, q_binomial_theorem_check(a, z, q))
    checks.append(_check("qspecial.q_binomial", "numerical", worst < 1e-10,
                         {"residual": worst}))
    worst = 0.0
    for q in (0.1, 0.2, 0.5, 0.9):
        c = QSeriesConfig(q=q)
        for z in np.linspace(0.2, 4.0, 8):
            lhs = q_gamma(z + 1.0, c)
            rhs = (1.0 - q**z) / (1.0 - q) * q_gamma(z, c)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    checks.append(_check("qspecial.gamma_functional_eq", "numerical",
                         worst < 1e-10, {"residual": worst}))
    mono_ok = True
    for q in (0.1, 0.2, 0.5, 0.9):
        c = QSeriesConfig(q=q)
        zs = np.linspace(0.05, 5.0, 40)
        p0 = [q_digamma(z, 0, c) for z in zs]
        p1 = [q_digamma(z, 1, c) for z in zs]
        mono_ok = mono_ok and all(b > a for a, b in zip(p0, p0[1:]))
        mono_ok = mono_ok and all(b < a for a, b in zip(p1, p1[1:]))
    checks.append(_check("qspecial.digamma_monotonicity", "numerical",
                         mono_ok, {}))
    return checks


def _verify_scaling(params: ModelParams, theta: float,
                    rng: np.random.Generator) -> list:
    checks = []
    kq = kpz_quantities(params, theta)
    checks.append(_check("scaling.kpz_coefficient_identity", "numerical",
                         kq.coeff_residual < 1e-9,
                         {"residual": kq.coeff_residual}))
    co = coefficients(params, theta)
    h = 1e-5
    dk = (coefficients(params, theta + h).kappa
          - coefficients(params, theta - h).kappa) / (2 * h)
    pred = -2.0 * co.chi / co.phi_prime
    rel = abs(dk - pred) / abs(pred)
    checks.append(_check("scaling.kappa_derivative", "numerical", rel < 1e-6,
                         {"residual": rel}))
    chi_min = math.inf
    for _ in range(1000):
        q = rng.uniform(0.05, 0.95)
        nu = rng.uniform(0.01, 0.9)
        mu = rng.uniform(nu + 1e-3, 0.999)
        th = rng.uniform(0.05, 3.0)
        chi_min = min(chi_min, coefficients(ModelParams(q, mu, nu), th).chi)
    checks.append(_check("scaling.chi_positive", "numerical", chi_min > 0.0,
                         {"chi_min": chi_min}))
    return checks


def _verify_asymptotics(params: ModelParams, theta: float,
                        rng: np.random.Generator, sweeps: int = 20) -> list:
    from .asymptotics import (
        ExponentFunctions,
        identity_checks,
        steep_descent_check,
        taylor_check,
    )

    checks = []
    co = coefficients(params, theta, params.series_config(1e-15))
    ef = ExponentFunctions(co, params, c=0.5, x=0.25)
    tc = taylor_check(ef)
    chi2 = 2.0 * co.chi
    ok = (
        abs(tc["f0_d1"]) < 1e-6 * chi2
        and abs(tc["f0_d2"]) < 1e-6 * chi2
        and tc["f0_d3_residual"] < 1e-6
    )
    checks.append(_check("asymptotics.taylor", "numerical", ok, tc))
    ic = identity_checks(ef)
    checks.append(_check(
        "asymptotics.series_identities", "numerical",
        ic["f_identity_residual"] < 1e-8 and ic["one_identity_residual"] < 1e-8,
        ic,
    ))
    ok = True
    worst_f, worst_one = 0.0, 0.0
    for _ in range(sweeps):
        q = rng.uniform(0.05, 0.45)
        nu = rng.uniform(q, 0.45)
        mu = rng.uniform(nu + 2e-3, 0.5)
        pp = ModelParams(q, mu, nu)
        th = rng.uniform(0.05, min(3.0, pp.theta_bound) * 0.98)
        cc = coefficients(pp, th)
        eff = ExponentFunctions(cc, pp)
        dC = steep_descent_check(eff, "C", 1024)
        dD = steep_descent_check(eff, "D", 1024)
        ok = ok and dC.monotone and dC.max_at_zero and dD.monotone and dD.max_at_zero
        ii = identity_checks(eff)
        worst_f = max(worst_f, ii["f_identity_residual"])
        worst_one = max(worst_one, ii["one_identity_residual"])
    checks.append(_check("asymptotics.steep_descent_sweep", "numerical", ok,
                         {"sweeps": sweeps}))
    checks.append(_check("asymptotics.identity_sweep", "numerical",
                         worst_f < 1e-8 and worst_one < 1e-8,
                         {"worst_f": worst_f, "worst_one": worst_one}))
    return checks


def _verify_dynamics(params: ModelParams, theta: float, seed: int,
                     rng: np.random.Generator) -> list:
    from .dynamics import INFINITE, jump_weights

    checks = []
    worst = 0.0
    for _ in range(200):
        q = rng.uniform(0.05, 0.95)
        nu = rng.uniform(0.0, 0.9)
        mu = rng.uniform(max(nu, 1e-3), 0.999)
        m = int(rng.integers(0, 51)) if rng.random() < 0.8 else INFINITE
        t = jump_weights(ModelParams(q, mu, nu), m)
        worst = max(worst, abs(t.weights.sum() + t.tail_mass - 1.0))
    checks.append(_check("dynamics.jump_table_normalization", "numerical",
                         worst < 1e-12, {"worst": worst}))
    alpha = params.q**theta
    rho, j = stationary_density_current(params, alpha)
    res = measure_current(params, alpha, n_sites=1200, n_steps=80,
                          seed=seed, n_replicas=12)
    ok = (
        abs(res["rho_hat"] - rho) < 3.0 * res["stderr_rho"]
        and abs(res["j_hat"] - j) < 3.0 * res["stderr_j"]
    )
    checks.append(_check("dynamics.stationary_current", "statistical", ok,
                         {"rho": rho, "j": j, **res}))
    return checks


def _verify_fredholm(params: ModelParams, theta: float) -> list:
    checks = []
    co = coefficients(params, theta)
    worst_gap = 0.0
    worst_chain = 0.0
    for x in (-3.0, -1.0, 0.0, 1.0, 2.0):
        f60 = fredholm.f_gue(x, 60)
        f120 = fredholm.f_gue(x, 120)
        worst_gap = max(worst_gap, abs(f120 - f60))
        v = fredholm.f_gue_via_contour(x, 0.0, co, order=60)
        worst_chain = max(worst_chain, abs(v.real - f120) + abs(v.imag))
    checks.append(_check("fredholm.f_gue_dual_order", "numerical",
                         worst_gap < 1e-8, {"worst_gap": worst_gap}))
    checks.append(_check("fredholm.contour_chain", "numerical",
                         worst_chain < 1e-6, {"worst": worst_chain}))
    worst = 0.0
    for (n, tau, tol) in ((1, 0, 1e-6), (1, 5, 1e-6), (2, 3, 1e-5)):
        res = fredholm.mellin_barnes_check(params, n, tau, -0.7)
        worst = max(worst, res["gap"] / tol)
    checks.append(_check("fredholm.q_laplace_identity", "numerical",
                         worst < 1.0, {"worst_over_tol": worst}))
    return checks


def verify_all(level: str = "quick", seed: int = 20_240_801,
               params: ModelParams | None = None, theta: float = 0.4,
               report_path: str | None = None) -> dict:
    """Run the verification suite and return a machine-readable report.

    quick: deterministic numerical residual checks across all modules plus
    a fast stationarity measurement.  full: adds the law-of-large-numbers,
    fluctuation-exponent and Tracy-Widom ensembles at the acceptance
    parameters (long).
    """
    if level not in ("quick", "full"):
        raise ConfigError(f"level must be quick or full, got {level!r}")
    params = params or ModelParams(q=0.2, mu=0.4, nu=0.3)
    rng = np.random.default_rng(seed)
    checks = []
    checks += _verify_qspecial(params, rng)
    checks += _verify_scaling(params, theta, rng)
    checks += _verify_asymptotics(params, theta, rng,
                                  sweeps=20 if level == "quick" else 100)
    checks += _verify_dynamics(params, theta, seed, rng)
    checks += _verify_fredholm(params, theta)

    if level == "full":
        reference = TwReference()
        base = dict(q=params.q, mu=params.mu, nu=params.nu, theta=theta,
                    seed=seed)
        lln = lln_check(ExperimentConfig.from_dict(
            {**base, "N_list": [2000], "replicas": 100}))
        checks.append(_check("harness.lln", "statistical", lln["pass"], lln))
        cfg = ExperimentConfig.from_dict(
            {**base, "N_list": [250, 500, 1000, 2000, 4000], "replicas": 2000})
        samples = {}
        cache = JumpTableCache(params)
        co = coefficients(params, theta)
        for N in cfg.N_list:
            _, tau_int, _ = _realized_frame(co, N, 0.0)
            xs, _ = simulate_ensemble(params, N, tau_int, seed, cfg.replicas,
                                      cache=cache)
            samples[N] = xs
        fit = exponent_fit(cfg, samples_by_n=samples)
        checks.append(_check("harness.exponent", "statistical",
                             0.25 <= fit["slope"] <= 0.42, fit))
        tw_cfg = ExperimentConfig.from_dict(
            {**base, "N_list": [2000], "replicas": 5000})
        tw = run_tw_experiment(tw_cfg, reference=reference, cache=cache)
        tab = tw["per_N"][2000]
        ks_ok = tab["ks"] <= 0.10
        mean_ok = abs(tab["mean_xi"] - reference.mean) <= 0.15
        checks.append(_check("harness.tracy_widom", "statistical",
                             ks_ok and mean_ok,
                             {"ks": tab["ks"], "mean_xi": tab["mean_xi"],
                              "tw_mean": reference.mean}))

    passed = all(c["pass"] for c in checks)
    num_fail = any(not c["pass"] and c["kind"] == "numerical" for c in checks)
    stat_fail = any(not c["pass"] and c["kind"] == "statistical" for c in checks)
    report = {
        "level": level,
        "seed": seed,
        "params": {"q": params.q, "mu": params.mu, "nu": params.nu,
                   "theta": theta},
        "checks": checks,
        "pass": passed,
        "exit_code": 2 if num_fail else (1 if stat_fail else 0),
    }
    if report_path:
        payload = dict(report)
        import time as _time

        payload["timestamp"] = _time.strftime("%Y-%m-%dT%H:%M:%S")
        with open(report_path, "w") as fh:
            json.dump(_jsonable(payload), fh, sort_keys=True, indent=1)
            fh.write("\n")
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj
