"""Command-line interface.

Exit codes: 0 success, 1 statistical check failure, 2 numerical check
failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import fredholm, harness
from .dynamics import (
    JumpTableCache,
    StationaryIC,
    measure_current,
    simulate,
    simulate_ensemble,
)
from .errors import ConfigError, QHahnError
from .scaling import (
    ModelParams,
    coefficients,
    macroscopic_curve,
    stationary_density_current,
    theta_from_kappa,
)

EXIT_OK = 0
EXIT_STATISTICAL = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3


def _add_model_args(sub, theta: bool = True):
    sub.add_argument("--q", type=float, required=True)
    sub.add_argument("--mu", type=float, required=True)
    sub.add_argument("--nu", type=float, required=True)
    if theta:
        sub.add_argument("--theta", type=float)
        sub.add_argument("--kappa", type=float)


def _resolve_theta(args, params: ModelParams) -> float:
    if (args.theta is None) == (getattr(args, "kappa", None) is None):
        raise ConfigError("provide exactly one of --theta / --kappa")
    if args.theta is not None:
        return args.theta
    return theta_from_kappa(params, args.kappa)


def _out_stream(path):
    return open(path, "w") if path else sys.stdout


def cmd_coeffs(args) -> int:
    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    theta = _resolve_theta(args, params)
    co = coefficients(params, theta)
    payload = {
        "theta": co.theta,
        "kappa": co.kappa,
        "f": co.f,
        "chi": co.chi,
        "phi": co.phi,
        "phi_prime": co.phi_prime,
        "conditions": {
            "munu": params.cond_munu,
            "theta_bound": params.theta_bound,
            "theta_ok": params.theta_ok(theta),
        },
    }
    json.dump(payload, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_curve(args) -> int:
    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    thetas = np.linspace(args.theta_min, args.theta_max, args.points)
    pts, ends = macroscopic_curve(params, thetas)
    print("theta,x,y")
    for theta, x, y in pts:
        print(f"{float(theta)!r},{float(x)!r},{float(y)!r}")
    x0, y0 = ends["theta_to_0"]
    xi, yi = ends["theta_to_inf"]
    print(f"limit_theta_to_0,{x0!r},{y0!r}")
    print(f"limit_theta_to_inf,{xi!r},{yi!r}")
    return EXIT_OK


def cmd_theta_bound(args) -> int:
    print("q,theta_bound")
    for q in np.linspace(args.q_min, args.q_max, args.points):
        bound = math.log(2 * q / (1 + q)) / math.log(q)
        print(f"{float(q)!r},{float(bound)!r}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    theta = _resolve_theta(args, params)
    co = coefficients(params, theta)
    _, tau_int, c_real = harness._realized_frame(co, args.N, args.c)
    cache = JumpTableCache(params)
    if args.ic == "step":
        xs, _tails = simulate_ensemble(
            params, args.N, tau_int, args.seed, args.replicas, cache=cache
        )
    else:
        if not args.ic.startswith("stationary:"):
            raise ConfigError("--ic must be step or stationary:ALPHA")
        alpha = float(args.ic.split(":", 1)[1])
        xs = np.empty(args.replicas, dtype=np.int64)
        for r in range(args.replicas):
            res = simulate(params, args.N, tau_int, StationaryIC(alpha),
                           seed=args.seed, replica=r, cache=cache)
            xs[r] = res.x_target
    xi = harness._xi_from_positions(co, xs.astype(float), args.N, c_real)
    stream = _out_stream(args.out)
    try:
        stream.write("replica,N,tau,X_N,xi\n")
        for r, (x, v) in enumerate(zip(xs, xi)):
            stream.write(f"{r},{args.N},{tau_int},{int(x)},{float(v)!r}\n")
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


def cmd_stationary(args) -> int:
    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    rho, j = stationary_density_current(params, args.alpha)
    res = measure_current(params, args.alpha, n_sites=args.sites,
                          n_steps=args.steps, seed=args.seed)
    payload = {
        "rho_hat": res["rho_hat"],
        "j_hat": res["j_hat"],
        "stderr_rho": res["stderr_rho"],
        "stderr_j": res["stderr_j"],
        "rho_exact": rho,
        "j_exact": j,
        "site_steps": res["site_steps"],
    }
    json.dump(payload, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    ok = (
        abs(res["rho_hat"] - rho) < 4 * res["stderr_rho"]
        and abs(res["j_hat"] - j) < 4 * res["stderr_j"]
    )
    return EXIT_OK if ok else EXIT_STATISTICAL


def cmd_descent(args) -> int:
    from .asymptotics import CircleD, ExponentFunctions, steep_descent_check

    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    theta = _resolve_theta(args, params)
    co = coefficients(params, theta)
    ef = ExponentFunctions(co, params)
    prof = steep_descent_check(ef, args.contour, args.grid)
    if args.contour == "C":
        vals = ef.f0_on_circle_c(prof.grid)
    else:
        pts = CircleD(params.q, theta).points(prof.grid)
        vals = ef.f0(pts[np.abs(prof.grid) < math.pi])  # avoid the cut at -q^theta
        full = np.full(prof.grid.shape, np.nan, dtype=complex)
        full[np.abs(prof.grid) < math.pi] = vals
        vals = full
    print("param,Re_f0,Im_f0")
    for s, v in zip(prof.grid, vals):
        print(f"{float(s)!r},{float(v.real)!r},{float(v.imag)!r}")
    valid = params.cond_munu and params.theta_ok(theta)
    if valid and not (prof.monotone and prof.max_at_zero):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_tw_cdf(args) -> int:
    xs = np.arange(args.x_min, args.x_max + 0.5 * args.step, args.step)
    f_lo = [fredholm.f_gue(float(x), args.order) for x in xs]
    gap = max(
        abs(fredholm.f_gue(float(x), 2 * args.order) - f)
        for x, f in zip(xs[:: max(1, len(xs) // 8)], f_lo[:: max(1, len(xs) // 8)])
    )
    print(f"# order={args.order} doubled_order_gap={gap!r}")
    print("x,F_GUE")
    for x, f in zip(xs, f_lo):
        print(f"{float(x)!r},{float(f)!r}")
    return EXIT_OK


def cmd_fredholm_check(args) -> int:
    params = ModelParams(q=args.q, mu=args.mu, nu=args.nu)
    res = fredholm.mellin_barnes_check(
        params, args.N, args.tau, args.zeta, radius=args.radius
    )
    payload = {
        "lhs": res["lhs"],
        "rhs_re": res["rhs_re"],
        "rhs_im": res["rhs_im"],
        "gap": res["gap"],
        "radius": res["radius"],
        "L_trunc": res["s_halfwidth"],
        "orders": list(res["orders"]),
        "lhs_tail_bound": res["lhs_tail_bound"],
    }
    json.dump(payload, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    tol = 1e-6 if args.N == 1 else 1e-5
    return EXIT_OK if res["gap"] < tol else EXIT_NUMERICAL


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        data = json.load(fh)
    if args.out:
        data["out"] = args.out
    config = harness.ExperimentConfig.from_dict(data)
    result = harness.run_tw_experiment(config)
    summary = {
        str(N): {k: v for k, v in tab.items() if k not in ("X", "xi")}
        for N, tab in result["per_N"].items()
    }
    json.dump(harness._jsonable(summary), sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.module:
        params = ModelParams(q=0.2, mu=0.4, nu=0.3)
        rng = np.random.default_rng(args.seed)
        suites = {
            "qspecial": lambda: harness._verify_qspecial(params, rng),
            "scaling": lambda: harness._verify_scaling(params, 0.4, rng),
            "asymptotics": lambda: harness._verify_asymptotics(params, 0.4, rng),
            "dynamics": lambda: harness._verify_dynamics(params, 0.4, args.seed, rng),
            "fredholm": lambda: harness._verify_fredholm(params, 0.4),
        }
        if args.module not in suites:
            raise ConfigError(f"unknown module {args.module!r}")
        checks = suites[args.module]()
        for c in checks:
            print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}")
        if all(c["pass"] for c in checks):
            return EXIT_OK
        kinds = {c["kind"] for c in checks if not c["pass"]}
        return EXIT_NUMERICAL if "numerical" in kinds else EXIT_STATISTICAL
    report = harness.verify_all(args.level, seed=args.seed,
                                report_path=args.report)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}")
    print(f"overall: {'PASS' if report['pass'] else 'FAIL'}")
    return report["exit_code"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qhahn",
        description="q-Hahn TASEP numerical laboratory",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("coeffs", help="scaling coefficients as JSON")
    _add_model_args(s)
    s.set_defaults(fn=cmd_coeffs)

    s = sub.add_parser("curve", help="macroscopic curve data as CSV")
    _add_model_args(s, theta=False)
    s.add_argument("--theta-min", type=float, required=True)
    s.add_argument("--theta-max", type=float, required=True)
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(fn=cmd_curve)

    s = sub.add_parser("theta-bound", help="upper bound on theta vs q as CSV")
    s.add_argument("--q-min", type=float, required=True)
    s.add_argument("--q-max", type=float, required=True)
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(fn=cmd_theta_bound)

    s = sub.add_parser("simulate", help="ensemble of tagged-particle positions")
    _add_model_args(s)
    s.add_argument("--c", type=float, default=0.0)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--replicas", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--ic", default="step")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("stationary", help="stationary density/current measurement")
    _add_model_args(s, theta=False)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--sites", type=int, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(fn=cmd_stationary)

    s = sub.add_parser("descent", help="steep-descent profile data")
    _add_model_args(s)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--contour", choices=("C", "D"), default="C")
    s.set_defaults(fn=cmd_descent)

    s = sub.add_parser("tw-cdf", help="Tracy-Widom GUE CDF table")
    s.add_argument("--x-min", type=float, required=True)
    s.add_argument("--x-max", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--order", type=int, default=60)
    s.set_defaults(fn=cmd_tw_cdf)

    s = sub.add_parser("fredholm-check", help="q-Laplace transform identity check")
    _add_model_args(s, theta=False)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--tau", type=int, required=True)
    s.add_argument("--zeta", type=float, required=True)
    s.add_argument("--radius", type=float)
    s.set_defaults(fn=cmd_fredholm_check)

    s = sub.add_parser("experiment", help="run a configured ensemble experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_experiment)

    s = sub.add_parser("verify", help="run the verification suite")
    s.add_argument("module", nargs="?", default=None, help=argparse.SUPPRESS)
    s.add_argument("--level", choices=("quick", "full"), default="quick")
    s.add_argument("--report")
    s.add_argument("--seed", type=int, default=20_240_801)
    s.set_defaults(fn=cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QHahnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
