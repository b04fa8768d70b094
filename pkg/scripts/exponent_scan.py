#!/usr/bin/env python3
"""Estimate the fluctuation exponent: slope of log sd(X_N) vs log N.

Usage: python scripts/exponent_scan.py [replicas]
"""

import sys
import time

from qhahn.dynamics import JumpTableCache, simulate_ensemble
from qhahn.harness import ExperimentConfig, _realized_frame, exponent_fit
from qhahn.scaling import ModelParams, coefficients


def main():
    replicas = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    params = ModelParams(q=0.2, mu=0.4, nu=0.3)
    theta = 0.4
    n_list = [250, 500, 1000, 2000, 4000]
    cfg = ExperimentConfig.from_dict({
        "q": params.q, "mu": params.mu, "nu": params.nu, "theta": theta,
        "N_list": n_list, "replicas": replicas, "seed": 20_240_801,
    })
    cache = JumpTableCache(params)
    co = coefficients(params, theta)
    samples = {}
    for N in n_list:
        t0 = time.time()
        _, tau_int, _ = _realized_frame(co, N, 0.0)
        xs, _ = simulate_ensemble(params, N, tau_int, cfg.seed, replicas,
                                  cache=cache)
        samples[N] = xs
        print(f"N={N:5d} tau={tau_int:6d} sd={xs.std(ddof=1):9.4f} "
              f"({time.time() - t0:.1f} s)")
    res = exponent_fit(cfg, samples_by_n=samples)
    print(f"slope = {res['slope']:.4f}  CI = ({res['ci'][0]:.4f}, "
          f"{res['ci'][1]:.4f})  r2 = {res['r2']:.4f}")


if __name__ == "__main__":
    main()
