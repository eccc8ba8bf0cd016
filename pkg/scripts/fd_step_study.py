"""Finite-difference step study for the Kepler chart.

For a range of chart steps, reports |L P - I| and the Lagrange-matrix error
against the closed form obtained through Delaunay variables. The U-shaped
curve (truncation vs round-off) motivates the default step of 1e-7.

Usage: python3 scripts/fd_step_study.py [--points 20]
"""

import argparse
import math

import numpy as np

from osculate import brackets as br
from osculate.motions import kepler_chart
from osculate.verify import random_elements


def delaunay_lagrange(a, mu=1.0):
    """Closed-form Lagrange matrix at t = epoch, via canonical Delaunay variables."""
    sma, ecc, inc = a[:3]
    L = math.sqrt(mu * sma)
    eta = math.sqrt(1 - ecc**2)
    dL = 0.5 * L / sma
    D = np.zeros((6, 6))
    D[0, 5] = D[1, 4] = D[2, 3] = 1.0
    D[3, 0] = dL
    D[4, 0], D[4, 1] = dL * eta, -L * ecc / eta
    D[5, :3] = D[4, 0] * math.cos(inc), D[4, 1] * math.cos(inc), -L * eta * math.sin(inc)
    return D.T @ br.canonical_matrix(3) @ D


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    points = [random_elements(rng) for _ in range(args.points)]
    print(f"{'fd_step':>8} {'max |LP-I|':>12} {'max |L-L_exact|':>16}")
    for step in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9):
        chart = kepler_chart(fd_step=step)
        inv = max(br.verify_inverse(chart, a, 0.0) for a in points)
        err = max(np.max(np.abs(br.lagrange_matrix(chart, a, 0.0) - delaunay_lagrange(a))) for a in points)
        print(f"{step:8.0e} {inv:12.3e} {err:16.3e}")


if __name__ == "__main__":
    main()
