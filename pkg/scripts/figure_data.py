#!/usr/bin/env python3
"""Emit the three reference figure datasets as CSV files.

  macro_curve.csv   - the rarefaction-fan curve (f/kappa, 1/kappa) with its
                      axis-touching limit points
  theta_bound.csv   - the technical upper bound on theta as a function of q
  descent_C.csv,
  descent_D.csv     - descent profiles of the exponent function on the two
                      circular contours

Usage: python scripts/figure_data.py [outdir]
"""

import math
import pathlib
import sys

import numpy as np

from qhahn.asymptotics import ExponentFunctions, steep_descent_check
from qhahn.scaling import ModelParams, coefficients, macroscopic_curve

Q, MU, NU, THETA = 0.2, 0.4, 0.3, 0.4


def main():
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "figure_data")
    outdir.mkdir(parents=True, exist_ok=True)
    params = ModelParams(q=Q, mu=MU, nu=NU)

    pts, ends = macroscopic_curve(params, np.geomspace(0.02, 12.0, 300))
    with open(outdir / "macro_curve.csv", "w") as fh:
        fh.write("theta,x,y\n")
        for theta, x, y in pts:
            fh.write(f"{theta!r},{x!r},{y!r}\n")
        fh.write(f"limit_theta_to_0,{ends['theta_to_0'][0]!r},0.0\n")
        fh.write(f"limit_theta_to_inf,0.0,{ends['theta_to_inf'][1]!r}\n")

    with open(outdir / "theta_bound.csv", "w") as fh:
        fh.write("q,theta_bound\n")
        for q in np.linspace(0.01, 0.99, 197):
            bound = math.log(2 * q / (1 + q)) / math.log(q)
            fh.write(f"{q!r},{bound!r}\n")

    co = coefficients(params, THETA)
    ef = ExponentFunctions(co, params)
    for contour in ("C", "D"):
        prof = steep_descent_check(ef, contour, 2048)
        with open(outdir / f"descent_{contour}.csv", "w") as fh:
            fh.write("param,descent_functional\n")
            for s, v in zip(prof.grid, prof.values):
                fh.write(f"{s!r},{v!r}\n")
        print(f"descent {contour}: monotone={prof.monotone} "
              f"max_at_zero={prof.max_at_zero}")
    print(f"wrote figure data to {outdir}/")


if __name__ == "__main__":
    main()
