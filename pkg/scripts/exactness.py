"""Reconstructed varying-constants trajectory vs direct Cartesian integration.

Prints the maximum position deviation for several perturbations and
tolerances; the deviation tracks the integrator tolerance, not the
perturbation size, because the method introduces no approximation.

Usage: python3 scripts/exactness.py [--periods 10]
"""

import argparse
from dataclasses import dataclass

import numpy as np

from osculate.dynsys import IntegratorConfig
from osculate.kepler import KeplerModel, OrbitalElements, orbital_period
from osculate.motions import kepler_chart
from osculate.varconst import (
    direct_perturbed,
    integrate_varconst,
    inverse_square,
    reconstruct_trajectory,
    rotating_dipole,
    third_body,
)
from osculate.verify import REFERENCE_ELEMENTS


@dataclass(frozen=True)
class ExactnessRun:
    periods: int = 10
    samples_per_period: int = 8
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12


def deviation(dist, cfg: ExactnessRun) -> float:
    chart = kepler_chart()
    el = OrbitalElements.from_array(REFERENCE_ELEMENTS)
    t1 = cfg.periods * orbital_period(el)
    n = cfg.periods * cfg.samples_per_period + 1
    icfg = IntegratorConfig(cfg.rel_tol, cfg.abs_tol)
    rec = reconstruct_trajectory(chart, integrate_varconst(chart, dist, el, 0.0, t1, icfg, n))
    direct = direct_perturbed(KeplerModel(), dist, rec.states[0], 0.0, t1, icfg, n)
    return float(np.max(np.abs(rec.states[:, :3] - direct.states[:, :3])))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--periods", type=int, default=10)
    args = ap.parse_args()
    cases = [
        ("eps/r^2, eps=1e-3", inverse_square(1e-3)),
        ("eps/r^2, eps=1e-2", inverse_square(1e-2)),
        ("rotating dipole, eps=1e-4", rotating_dipole(1e-4, 0.3)),
        ("third body, eps=1e-3", third_body(1e-3, radius=5.0)),
    ]
    print(f"{'disturbance':<28} {'rel_tol':>8} {'max |dq|':>10}")
    for label, dist in cases:
        for tol in (1e-8, 1e-10):
            cfg = ExactnessRun(args.periods, rel_tol=tol, abs_tol=tol * 1e-2)
            print(f"{label:<28} {tol:8.0e} {deviation(dist, cfg):10.2e}")


if __name__ == "__main__":
    main()
