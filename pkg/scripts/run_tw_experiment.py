#!/usr/bin/env python3
"""Run a Tracy-Widom convergence experiment and print the per-N summary.

Equivalent to `qhahn experiment --config <file>` but with the acceptance
defaults inlined; edit PLAN or pass an output directory.

Usage: python scripts/run_tw_experiment.py [outdir] [replicas]
"""

import sys

from qhahn.harness import ExperimentConfig, TwReference, run_tw_experiment

PLAN = {
    "q": 0.2,
    "mu": 0.4,
    "nu": 0.3,
    "theta": 0.4,
    "c": 0.0,
    "N_list": [250, 1000, 4000],
    "replicas": 2000,
    "seed": 20_240_801,
}


def main():
    data = dict(PLAN)
    if len(sys.argv) > 1:
        data["out"] = sys.argv[1]
    if len(sys.argv) > 2:
        data["replicas"] = int(sys.argv[2])
    config = ExperimentConfig.from_dict(data)
    reference = TwReference()
    result = run_tw_experiment(config, reference=reference)
    print(f"tw reference: mean={reference.mean:.6f} sd={reference.sd:.6f}")
    for N, tab in result["per_N"].items():
        print(
            f"N={N:5d} replicas={tab['replicas']} tau={tab['tau_realized']} "
            f"mean_xi={tab['mean_xi']:+.4f} sd_xi={tab['sd_xi']:.4f} "
            f"KS={tab['ks']:.4f}"
        )


if __name__ == "__main__":
    main()
