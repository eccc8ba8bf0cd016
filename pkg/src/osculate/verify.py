"""Numerical verification suite.

Each check computes one scalar (a residual, drift or relative error) and
compares it with a fixed tolerance. ``run_checks`` evaluates a selection and
``format_table`` renders the pass/fail table printed by ``osculate verify``.
Random probes come from a seeded generator, so every run is reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import brackets as br
from .dynsys import IntegratorConfig, check_composition, flow_trajectory
from .kepler import (
    KeplerModel,
    OrbitalElements,
    PhaseState,
    eccentricity_vector,
    kepler_field,
    kepler_hamiltonian,
    orbital_period,
    state_from_elements,
    swept_area_rate,
)
from .motions import identity_chart, kepler_chart, oscillator_chart
from .varconst import (
    direct_perturbed,
    element_rates_lagrange,
    element_rates_poisson,
    integrate_varconst,
    inverse_square,
    reconstruct_trajectory,
    rotating_dipole,
    third_body,
)

DEFAULT_SEED = 1809
MODEL = KeplerModel(1.0)
# sma, ecc, inc, raan, argp, m0 with epoch 0
REFERENCE_ELEMENTS = np.array([1.3, 0.2, 0.4, 1.0, 2.0, 0.5])


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = DEFAULT_SEED
    corrupt_sign: bool = False  # negative control: flips the Poisson matrix sign


@dataclass(frozen=True)
class Check:
    name: str
    group: str
    tolerance: float
    run: Callable[[VerifyOptions], float]
    criterion: int | None = None
    description: str = ""


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    value: float
    tolerance: float
    criterion: int | None = None

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.value) and self.value < self.tolerance)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        tag = f"[{self.criterion:>2}]" if self.criterion is not None else "[  ]"
        return f"{tag} {self.name:<36} {self.value:>12.3e} < {self.tolerance:<8.1e} {verdict}"


# -- random probes -----------------------------------------------------------


def random_elements(rng: np.random.Generator, ecc=(0.05, 0.6), sma=(0.7, 2.0), inc_margin=0.1):
    return np.array(
        [
            rng.uniform(*sma),
            rng.uniform(*ecc),
            rng.uniform(inc_margin, math.pi - inc_margin),
            rng.uniform(0, 2 * math.pi),
            rng.uniform(0, 2 * math.pi),
            rng.uniform(0, 2 * math.pi),
        ]
    )


def _period(sma: float) -> float:
    return 2 * math.pi * math.sqrt(sma**3 / MODEL.mu)


def _wrapped_max(a, b, mask=(False, False, False, True, True, True)) -> float:
    d = np.asarray(a) - np.asarray(b)
    for i, is_angle in enumerate(mask):
        if is_angle:
            d[..., i] = (d[..., i] + math.pi) % (2 * math.pi) - math.pi
    return float(np.max(np.abs(d)))


# -- Kepler's laws and conservation -------------------------------------------


def _third_law_constant(opts):
    vals = []
    for a in (0.5, 1.0, 2.0, 4.0):
        T = orbital_period(OrbitalElements(a, 0.1, 0.3, 0, 0, 0), MODEL)
        vals.append(T**2 / a**3)
    vals = np.array(vals)
    return float(np.max(np.abs(vals / vals[0] - 1)))


def _third_law_ratio(opts):
    t4 = orbital_period(OrbitalElements(4.0, 0.1, 0.3, 0, 0, 0), MODEL)
    t1 = orbital_period(OrbitalElements(1.0, 0.1, 0.3, 0, 0, 0), MODEL)
    return abs(t4 / t1 - 8.0) / 8.0


_CONSERVATION_ELEMENTS = OrbitalElements(1.0, 0.6, 0.4, 1.0, 2.0, 0.5)


def _ten_period_samples(cfg: IntegratorConfig):
    x0 = state_from_elements(_CONSERVATION_ELEMENTS, MODEL, 0.0).vector
    T = orbital_period(_CONSERVATION_ELEMENTS, MODEL)
    return flow_trajectory(kepler_field(MODEL), 0.0, x0, 10 * T, cfg, 101).states


def _second_law(opts):
    # tighter than default tolerances: the drift budget is 1e-10 over 10 periods
    states = _ten_period_samples(IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14))
    rates = np.array([swept_area_rate(PhaseState.from_vector(0, x)) for x in states])
    return float(np.max(np.abs(rates - rates[0])))


def _conservation(quantity: str):
    def run(opts):
        states = _ten_period_samples(IntegratorConfig())
        if quantity == "energy":
            vals = np.array([[kepler_hamiltonian(x, MODEL)] for x in states])
        elif quantity == "angular_momentum":
            vals = np.cross(states[:, :3], states[:, 3:])
        else:
            vals = np.array([eccentricity_vector(PhaseState.from_vector(0, x), MODEL) for x in states])
        return float(np.max(np.abs(vals - vals[0])))

    return run


# -- flows and charts ----------------------------------------------------------


def _composition(opts):
    rng = np.random.default_rng(opts.seed)
    field = kepler_field(MODEL)
    worst = 0.0
    for _ in range(20):
        a = random_elements(rng)
        T = _period(a[0])
        x0 = state_from_elements(OrbitalElements.from_array(a), MODEL, 0.0).vector
        t0 = rng.uniform(-1.0, 1.0)
        t1 = t0 + rng.uniform(-T, T)
        t2 = t0 + rng.uniform(-T, T)
        worst = max(worst, check_composition(field, t0, t1, t2, x0))
    return worst


def _chart_round_trip(opts):
    rng = np.random.default_rng(opts.seed + 1)
    chart = kepler_chart(MODEL)
    worst = 0.0
    for _ in range(100):
        a = random_elements(rng, ecc=(0.01, 0.9), sma=(0.5, 3.0), inc_margin=0.05)
        for t in rng.uniform(-20.0, 20.0, size=5):
            back = chart.to_elements(chart.to_phase(a, t), t)
            worst = max(worst, _wrapped_max(back, a))
    return worst


# -- brackets ------------------------------------------------------------------


def _inverse_residual(chart, el, t, opts):
    bm = br.bracket_matrices(chart, el, t)
    P = -bm.poisson if opts.corrupt_sign else bm.poisson
    return float(np.max(np.abs(bm.lagrange @ P - np.eye(chart.dim))))


def _duality_analytic(opts):
    rng = np.random.default_rng(opts.seed + 2)
    worst = 0.0
    for chart in (identity_chart(3), identity_chart(1), oscillator_chart(1.0), oscillator_chart(2.5)):
        for _ in range(5):
            el = rng.uniform(-2, 2, size=chart.dim)
            worst = max(worst, _inverse_residual(chart, el, rng.uniform(-10, 10), opts))
    return worst


def _duality_kepler(opts):
    rng = np.random.default_rng(opts.seed + 3)
    chart = kepler_chart(MODEL)
    worst = 0.0
    for _ in range(20):
        a = random_elements(rng)
        t = rng.uniform(0, _period(a[0]))
        worst = max(worst, _inverse_residual(chart, a, t, opts))
    return worst


def _time_independence_kepler(opts):
    rng = np.random.default_rng(opts.seed + 4)
    chart = kepler_chart(MODEL)
    points = [REFERENCE_ELEMENTS] + [random_elements(rng) for _ in range(4)]
    worst = 0.0
    for a in points:
        T = _period(a[0])
        for span in (0.37 * T, T):
            worst = max(worst, br.time_independence_residual(chart, a, 0.0, span))
    return worst


def _time_independence_oscillator(opts):
    rng = np.random.default_rng(opts.seed + 5)
    worst = 0.0
    for omega in (1.0, 2.5):
        chart = oscillator_chart(omega)
        for _ in range(5):
            el = rng.uniform(-2, 2, size=2)
            t1 = rng.uniform(-5, 5)
            for span in (1.0, rng.uniform(0, 10)):
                worst = max(worst, br.time_independence_residual(chart, el, t1, t1 + span))
    return worst


def _flow_symplecticity(opts):
    rng = np.random.default_rng(opts.seed + 6)
    field = kepler_field(MODEL)
    worst = 0.0
    for _ in range(10):
        a = random_elements(rng)
        x0 = state_from_elements(OrbitalElements.from_array(a), MODEL, 0.0).vector
        worst = max(worst, br.flow_symplecticity_residual(field, 0.0, _period(a[0]), x0))
    return worst


class Polynomial:
    """Sum of monomials c * prod x_k^e_k on phase space."""

    def __init__(self, coeffs, exponents):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.exponents = np.asarray(exponents, dtype=int)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.coeffs @ np.prod(x ** self.exponents, axis=1))

    @classmethod
    def random(cls, rng, dim=6, degree=3, terms=5):
        exps = []
        while len(exps) < terms:
            e = np.zeros(dim, dtype=int)
            for _ in range(rng.integers(1, degree + 1)):
                e[rng.integers(dim)] += 1
            exps.append(e)
        return cls(rng.uniform(-1, 1, size=terms), exps)


def _jacobi(opts):
    rng = np.random.default_rng(opts.seed + 7)
    worst = 0.0
    for _ in range(10):
        f, g, h = (Polynomial.random(rng) for _ in range(3))
        for _ in range(10):
            x = rng.uniform(-1, 1, size=6)
            worst = max(worst, br.jacobi_residual(f, g, h, x))
    return worst


def _Lcomp(k):
    def f(x):
        return float(np.cross(x[:3], x[3:])[k])

    return f


def _H(x):
    return kepler_hamiltonian(x, MODEL)


def _ex(x):
    return float(eccentricity_vector(PhaseState.from_vector(0, x), MODEL)[0])


_POISSON_PAIRS = {
    "poisson_theorem_H_Lz": (_H, _Lcomp(2)),
    "poisson_theorem_Lx_Ly": (_Lcomp(0), _Lcomp(1)),
    "poisson_theorem_H_ex": (_H, _ex),
}


def _poisson_theorem(pair):
    f, g = _POISSON_PAIRS[pair]

    def run(opts):
        rng = np.random.default_rng(opts.seed + 8)
        field = kepler_field(MODEL)
        worst = 0.0
        for a in [REFERENCE_ELEMENTS] + [random_elements(rng) for _ in range(2)]:
            x0 = state_from_elements(OrbitalElements.from_array(a), MODEL, 0.0).vector
            worst = max(worst, br.poisson_theorem_check(f, g, field, 0.0, x0, _period(a[0])))
        return worst

    return run


def _hamilton_equation(opts):
    rng = np.random.default_rng(opts.seed + 9)
    chart = kepler_chart(MODEL)
    coords = [(lambda k: (lambda x: float(x[k])))(k) for k in range(6)]
    worst = 0.0
    for _ in range(20):
        a = random_elements(rng)
        t = rng.uniform(0, 2 * _period(a[0]))
        for g in coords:
            worst = max(worst, br.hamilton_equation_residual(chart, _H, g, a, t))
    return worst


# -- variation of constants ---------------------------------------------------


def _random_disturbance(rng):
    kind = rng.integers(3)
    eps = 10 ** rng.uniform(-4, -2)
    if kind == 0:
        return inverse_square(eps)
    if kind == 1:
        return rotating_dipole(eps, rng.uniform(0.1, 2.0))
    return third_body(eps, 1.0, rng.uniform(4.0, 8.0), rng.uniform(0, 2 * math.pi))


def _rate_forms(opts):
    rng = np.random.default_rng(opts.seed + 10)
    chart = kepler_chart(MODEL)
    worst = 0.0
    for _ in range(50):
        a = random_elements(rng)
        t = rng.uniform(0, _period(a[0]))
        dist = _random_disturbance(rng)
        diff = element_rates_poisson(chart, dist, t, a) - element_rates_lagrange(chart, dist, t, a)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def _exactness(dist_factory):
    def run(opts):
        chart = kepler_chart(MODEL)
        dist = dist_factory()
        t1 = 10 * _period(REFERENCE_ELEMENTS[0])
        cfg = IntegratorConfig()
        etraj = integrate_varconst(chart, dist, REFERENCE_ELEMENTS, 0.0, t1, cfg, 101)
        rec = reconstruct_trajectory(chart, etraj)
        x0 = chart.to_phase(REFERENCE_ELEMENTS, 0.0)
        direct = direct_perturbed(MODEL, dist, x0, 0.0, t1, cfg, 101)
        return float(np.max(np.abs(rec.states[:, :3] - direct.states[:, :3])))

    return run


def inverse_square_apsidal_advance(epsilon: float, ang_mom_sq: float) -> float:
    """Periapsis advance per radial period for the potential -mu/r - eps/r^2.

    The radial equation is Kepler's with L^2 replaced by L^2 - 2 eps, so the
    apsidal angle is 2 pi / sqrt(1 - 2 eps / L^2).
    """
    return 2 * math.pi * (1 / math.sqrt(1 - 2 * epsilon / ang_mom_sq) - 1)


def inverse_square_radial_period(x0, epsilon: float, mu: float = 1.0) -> float:
    """Radial period under -mu/r - eps/r^2: Kepler's, for the total energy."""
    q, p = np.asarray(x0[:3]), np.asarray(x0[3:])
    energy_total = 0.5 * p @ p - mu / np.linalg.norm(q) - epsilon / (q @ q)
    a_eff = -mu / (2 * energy_total)
    return 2 * math.pi * math.sqrt(a_eff**3 / mu)


_PRECESSION_EPS = 1e-3


def _precession_run(opts):
    chart = kepler_chart(MODEL)
    x0 = chart.to_phase(REFERENCE_ELEMENTS, 0.0)
    Tr = inverse_square_radial_period(x0, _PRECESSION_EPS, MODEL.mu)
    etraj = integrate_varconst(
        chart, inverse_square(_PRECESSION_EPS), REFERENCE_ELEMENTS, 0.0, 10 * Tr, IntegratorConfig(), 11
    )
    return x0, etraj


def _apsidal_precession(opts):
    x0, etraj = _precession_run(opts)
    L2 = float(np.sum(np.cross(x0[:3], x0[3:]) ** 2))
    expected = inverse_square_apsidal_advance(_PRECESSION_EPS, L2)
    argp = np.unwrap(etraj.elements[:, 4])
    measured = (argp[-1] - argp[0]) / 10
    return abs(measured / expected - 1)


def _no_secular_sma(opts):
    _, etraj = _precession_run(opts)
    sma = etraj.elements[:, 0]
    return float(np.max(np.abs(sma[1:] - sma[0])))


# -- registry ------------------------------------------------------------------

CHECKS: tuple[Check, ...] = (
    Check("third_law_constant", "kepler", 1e-12, _third_law_constant, 1,
          "period^2/sma^3 spread across sma in {0.5,1,2,4} (relative)"),
    Check("third_law_ratio", "kepler", 1e-12, _third_law_ratio, 1,
          "period(4)/period(1) vs 8 (relative)"),
    Check("second_law_area_rate", "kepler", 1e-10, _second_law, 2,
          "swept-area rate drift over 10 periods, ecc=0.6"),
    Check("conservation_energy", "kepler", 1e-9, _conservation("energy"), 3,
          "energy drift over 10 periods"),
    Check("conservation_angular_momentum", "kepler", 1e-9, _conservation("angular_momentum"), 3,
          "angular momentum drift over 10 periods"),
    Check("conservation_eccentricity_vector", "kepler", 1e-9, _conservation("eccentricity"), 3,
          "eccentricity vector drift over 10 periods"),
    Check("flow_composition", "dynsys", 1e-8, _composition, 4,
          "Phi(t2,t1,Phi(t1,t0,x)) vs Phi(t2,t0,x), 20 random probes"),
    Check("chart_round_trip", "motions", 1e-9, _chart_round_trip, 5,
          "to_elements(to_phase(a,t),t) vs a, 100 points x 5 times"),
    Check("duality_analytic", "brackets", 1e-10, _duality_analytic, 6,
          "|L P - I| on identity and oscillator charts"),
    Check("duality_kepler", "brackets", 1e-4, _duality_kepler, 6,
          "|L P - I| at 20 random Kepler points"),
    Check("time_independence_kepler", "brackets", 1e-4, _time_independence_kepler, 7,
          "Lagrange matrix change over 0.37 and 1 period"),
    Check("time_independence_oscillator", "brackets", 1e-9, _time_independence_oscillator, 7,
          "Lagrange matrix change on the oscillator chart"),
    Check("flow_symplecticity", "brackets", 1e-5, _flow_symplecticity, 8,
          "|J^T S J - S| over one period, 10 random states"),
    Check("jacobi_identity", "brackets", 1e-5, _jacobi, 9,
          "cyclic sum for 10 cubic triples x 10 states"),
    Check("poisson_theorem_H_Lz", "brackets", 1e-5, _poisson_theorem("poisson_theorem_H_Lz"), 10,
          "{H, Lz} drift over one period"),
    Check("poisson_theorem_Lx_Ly", "brackets", 1e-5, _poisson_theorem("poisson_theorem_Lx_Ly"), 10,
          "{Lx, Ly} drift over one period"),
    Check("poisson_theorem_H_ex", "brackets", 1e-5, _poisson_theorem("poisson_theorem_H_ex"), 10,
          "{H, e_x} drift over one period"),
    Check("rate_form_equivalence", "varconst", 1e-8, _rate_forms, 11,
          "parentheses vs bracket element rates, 50 probes"),
    Check("exactness_inverse_square", "varconst", 1e-6, _exactness(lambda: inverse_square(1e-3)), 12,
          "reconstructed vs direct position, eps/r^2, 10 periods"),
    Check("exactness_rotating_dipole", "varconst", 1e-6,
          _exactness(lambda: rotating_dipole(1e-4, 0.3)), 12,
          "reconstructed vs direct position, rotating dipole, 10 periods"),
    Check("apsidal_precession", "varconst", 0.02, _apsidal_precession, 13,
          "secular argp advance vs closed form (relative)"),
    Check("no_secular_sma", "varconst", 1e-6, _no_secular_sma, 14,
          "|sma(kT) - sma(0)|, k = 1..10 radial periods"),
    Check("hamilton_equation", "brackets", 1e-6, _hamilton_equation, 15,
          "d/dt g(Phi~) vs {H, g}(Phi~), 6 coordinates x 20 probes"),
)

CHECKS_BY_NAME = {c.name: c for c in CHECKS}


def select(filter_: str | None = None) -> list[Check]:
    """Checks of group ``filter_``, else those whose name contains it (all when None)."""
    if not filter_:
        return list(CHECKS)
    if any(c.group == filter_ for c in CHECKS):
        return [c for c in CHECKS if c.group == filter_]
    return [c for c in CHECKS if filter_ in c.name]


def run_check(name: str, opts: VerifyOptions = VerifyOptions()) -> CheckResult:
    c = CHECKS_BY_NAME[name]
    try:
        value = float(c.run(opts))
    except Exception:  # a crashing check is a failed check
        value = float("nan")
    return CheckResult(c.name, c.group, value, c.tolerance, c.criterion)


def run_checks(checks, opts: VerifyOptions = VerifyOptions(), jobs: int = 1) -> list[CheckResult]:
    names = [c.name for c in checks]
    if jobs <= 1:
        return [run_check(n, opts) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_check, names, [opts] * len(names)))


def format_table(results) -> str:
    header = f"{'crit':<4} {'check':<36} {'value':>12}   {'tolerance':<8} verdict"
    lines = [header, "-" * len(header)]
    lines += [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
