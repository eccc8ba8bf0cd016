"""Variation of constants for a perturbed integrable system.

The perturbed equations of motion are

    dq/dt = p,    dp/dt = -grad V(q) + grad_q Omega(t, q),

with Omega the disturbing function (added to the potential with a minus
sign). Writing the solution as ``q(t) = q(t, a(t))`` through a chart of the
unperturbed motions, the chart coordinates obey

    sum_j (a_i, a_j) da_j/dt = dOmega/da_i      (parentheses form)
    da_i/dt = sum_j {a_i, a_j} dOmega/da_j      (bracket form)

Both are implemented and must agree. In Hamiltonian language the perturbing
Hamiltonian is R = -Omega, and ``pullback_hamiltonian`` gives the same
rates from R composed with the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .brackets import gradient, poisson_matrix
from .dynsys import IntegratorConfig, Trajectory, VectorField, flow_trajectory
from .errors import IllConditioned
from .kepler import KeplerModel, OrbitalElements, PhaseState
from .motions import MotionChart, chart_jacobian, element_array

__all__ = [
    "DisturbingFunction",
    "ElementTrajectory",
    "zero_disturbance",
    "constant_disturbance",
    "inverse_square",
    "rotating_dipole",
    "third_body",
    "gradient_consistency",
    "element_gradient",
    "element_rates_poisson",
    "element_rates_lagrange",
    "integrate_varconst",
    "reconstruct_trajectory",
    "perturbed_field",
    "direct_perturbed",
    "pullback_hamiltonian",
    "pullback_rates",
]


@dataclass(frozen=True)
class DisturbingFunction:
    """Perturbing potential Omega(t, q) and its gradient in q."""

    eval: Callable[[float, np.ndarray], float]
    grad_q: Callable[[float, np.ndarray], np.ndarray]
    name: str = "custom"
    autonomous: bool = False
    params: dict = dc_field(default_factory=dict)

    def __call__(self, t: float, q) -> float:
        return float(self.eval(t, np.asarray(q, dtype=float)))

    def negated(self) -> "DisturbingFunction":
        """-Omega; turns a disturbing function into a perturbing Hamiltonian R."""
        return DisturbingFunction(
            lambda t, q: -self.eval(t, q),
            lambda t, q: -np.asarray(self.grad_q(t, q)),
            name=f"-{self.name}",
            autonomous=self.autonomous,
            params=self.params,
        )


def zero_disturbance() -> DisturbingFunction:
    return DisturbingFunction(
        lambda t, q: 0.0, lambda t, q: np.zeros(len(q)), "zero", autonomous=True
    )


def constant_disturbance(c: float) -> DisturbingFunction:
    return DisturbingFunction(
        lambda t, q: c, lambda t, q: np.zeros(len(q)), "constant", True, {"c": c}
    )


def inverse_square(epsilon: float) -> DisturbingFunction:
    """Omega = eps / |q|^2, a central perturbation with closed-form apsidal motion."""

    def ev(t, q):
        return epsilon / float(q @ q)

    def grad(t, q):
        r2 = float(q @ q)
        return -2.0 * epsilon * q / r2**2

    return DisturbingFunction(ev, grad, "inverse_square", True, {"epsilon": epsilon})


def rotating_dipole(epsilon: float, omega: float) -> DisturbingFunction:
    """Omega = eps q . (cos wt, sin wt, 0): a uniform force field turning in the plane z=0."""

    def direction(t):
        return np.array([math.cos(omega * t), math.sin(omega * t), 0.0])

    return DisturbingFunction(
        lambda t, q: epsilon * float(q @ direction(t)),
        lambda t, q: epsilon * direction(t),
        "rotating_dipole",
        False,
        {"epsilon": epsilon, "omega": omega},
    )


def third_body(
    epsilon: float,
    mu_third: float = 1.0,
    radius: float = 5.0,
    phase: float = 0.0,
    mu: float = 1.0,
) -> DisturbingFunction:
    """Disturbing function of a body on a circular orbit d(t) of the given radius.

    Omega = eps mu' (1/|q - d| - q.d/|d|^3): direct attraction minus the
    indirect term from the acceleration of the central body.
    """
    rate = math.sqrt(mu / radius**3)
    k = epsilon * mu_third

    def d(t):
        ang = rate * t + phase
        return radius * np.array([math.cos(ang), math.sin(ang), 0.0])

    def ev(t, q):
        dt = d(t)
        return k * (1.0 / np.linalg.norm(q - dt) - float(q @ dt) / radius**3)

    def grad(t, q):
        dt = d(t)
        rel = q - dt
        return k * (-rel / np.linalg.norm(rel) ** 3 - dt / radius**3)

    return DisturbingFunction(
        ev,
        grad,
        "third_body",
        False,
        {"epsilon": epsilon, "mu_third": mu_third, "radius": radius, "phase": phase},
    )


def gradient_consistency(dist: DisturbingFunction, t: float, q, step: float = 1e-6) -> float:
    """max |grad_q - central-difference gradient of eval| at one probe point."""
    q = np.asarray(q, dtype=float)
    fd = gradient(lambda y: dist(t, y), q, step)
    return float(np.max(np.abs(fd - np.asarray(dist.grad_q(t, q)))))


@dataclass(frozen=True)
class ElementTrajectory:
    """Chart coordinates a(t) of a perturbed motion, sampled on a grid."""

    times: np.ndarray
    elements: np.ndarray
    disturbing: DisturbingFunction
    chart_name: str
    epoch: float
    meta: dict = dc_field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def orbital_elements(self) -> list[OrbitalElements]:
        """Samples as OrbitalElements (Kepler chart only; angles re-normalized)."""
        return [OrbitalElements.from_array(a, self.epoch) for a in self.elements]


def _phase_parts(chart: MotionChart, el: np.ndarray, t: float):
    x = chart.to_phase(el, t)
    jac = chart_jacobian(chart, el, t).matrix
    return x, jac


def element_gradient(chart: MotionChart, dist: DisturbingFunction, t: float, el) -> np.ndarray:
    """dOmega/da by the chain rule through the position block of the chart Jacobian."""
    a = element_array(el)
    x, jac = _phase_parts(chart, a, t)
    n = chart.n_dof
    return jac[:n].T @ np.asarray(dist.grad_q(t, x[:n]), dtype=float)


def element_rates_poisson(
    chart: MotionChart, dist: DisturbingFunction, t: float, el, poisson: Optional[np.ndarray] = None
) -> np.ndarray:
    """da/dt = P dOmega/da with P the matrix of brackets of the chart coordinates.

    ``poisson`` may be passed in to reuse a matrix computed elsewhere.
    """
    a = element_array(el)
    x, jac = _phase_parts(chart, a, t)
    n = chart.n_dof
    grad_a = jac[:n].T @ np.asarray(dist.grad_q(t, x[:n]), dtype=float)
    if poisson is None:
        poisson = poisson_matrix(chart, x, t)
    return poisson @ grad_a


def element_rates_lagrange(
    chart: MotionChart, dist: DisturbingFunction, t: float, el, max_condition: float = 1e10
) -> np.ndarray:
    """Solve L da/dt = dOmega/da with L the matrix of Lagrange parentheses.

    Raises IllConditioned when cond(L) exceeds ``max_condition``.
    """
    a = element_array(el)
    x, jac = _phase_parts(chart, a, t)
    n = chart.n_dof
    grad_a = jac[:n].T @ np.asarray(dist.grad_q(t, x[:n]), dtype=float)
    lag = jac.T @ np.block(
        [[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]]
    ) @ jac
    cond = np.linalg.cond(lag)
    if not cond <= max_condition:
        raise IllConditioned(f"cond(L) = {cond:.3e} at elements {a}")
    return np.linalg.solve(lag, grad_a)


class _PoissonCache:
    """Reuse P while the elements stay within ``radius`` (max-norm) of where it was computed.

    The brackets of chart coordinates are functions on the manifold of
    motions alone, so P only goes stale as the elements move.
    """

    def __init__(self, chart: MotionChart, radius: float):
        self.chart = chart
        self.radius = radius
        self.at: Optional[np.ndarray] = None
        self.matrix: Optional[np.ndarray] = None
        self.refreshes = 0

    def get(self, a: np.ndarray, t: float) -> np.ndarray:
        if self.at is None or np.max(np.abs(a - self.at)) > self.radius:
            self.matrix = poisson_matrix(self.chart, self.chart.to_phase(a, t), t)
            self.at = a.copy()
            self.refreshes += 1
        return self.matrix


def varconst_field(
    chart: MotionChart,
    dist: DisturbingFunction,
    form: str = "poisson",
    cache_radius: float = 0.0,
) -> VectorField:
    """Element-space vector field of the varying constants."""
    if form not in ("poisson", "lagrange"):
        raise ValueError(f"unknown form {form!r}")
    cache = _PoissonCache(chart, cache_radius) if cache_radius > 0 else None

    def rhs(t, a):
        if form == "lagrange":
            return element_rates_lagrange(chart, dist, t, a)
        poisson = cache.get(a, t) if cache is not None else None
        return element_rates_poisson(chart, dist, t, a, poisson)

    return VectorField(chart.dim, rhs, lambda t, a: chart.in_domain(a), name=f"varconst-{form}")


def integrate_varconst(
    chart: MotionChart,
    dist: DisturbingFunction,
    el0,
    t0: float,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    n_samples: int = 2,
    form: str = "poisson",
    cache_radius: float = 0.0,
) -> ElementTrajectory:
    """Integrate the element rates from ``el0`` at ``t0`` to ``t1``.

    Raises DomainExit if the elements leave the chart (e.g. ecc crosses 0 or
    reaches 1). ``cache_radius > 0`` reuses bracket matrices between nearby
    element points, trading accuracy of order ``radius * |dP/da|`` for speed.
    """
    a0 = element_array(el0)
    fld = varconst_field(chart, dist, form, cache_radius)
    traj = flow_trajectory(fld, t0, a0, t1, cfg, n_samples)
    return ElementTrajectory(
        traj.times,
        traj.states,
        dist,
        chart.name,
        chart.epoch,
        {"form": form, "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "cache_radius": cache_radius},
    )


def reconstruct_trajectory(chart: MotionChart, etraj: ElementTrajectory) -> Trajectory:
    """Osculating reconstruction: state(t_i) = to_phase(a(t_i), t_i)."""
    states = np.array([chart.to_phase(a, t) for t, a in zip(etraj.times, etraj.elements)])
    return Trajectory(
        etraj.times.copy(),
        states,
        float(etraj.times[0]),
        float(etraj.times[-1]),
        float(etraj.meta.get("rel_tol", float("nan"))),
        {"source": "varconst"},
    )


def perturbed_field(model: KeplerModel, dist: DisturbingFunction) -> VectorField:
    mu = model.mu

    def rhs(t, x):
        q = x[:3]
        r = math.sqrt(q @ q)
        return np.concatenate([x[3:], -mu * q / r**3 + np.asarray(dist.grad_q(t, q))])

    return VectorField(6, rhs, lambda t, x: bool(x[:3] @ x[:3] > 0), name="perturbed-kepler")


def direct_perturbed(
    model: KeplerModel,
    dist: DisturbingFunction,
    state0,
    t0: float,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    n_samples: int = 2,
) -> Trajectory:
    """Cartesian integration of the perturbed equations: the independent oracle."""
    x0 = state0.vector if isinstance(state0, PhaseState) else np.asarray(state0, dtype=float)
    traj = flow_trajectory(perturbed_field(model, dist), t0, x0, t1, cfg, n_samples)
    traj.meta["source"] = "direct"
    return traj


def pullback_hamiltonian(chart: MotionChart, R: DisturbingFunction) -> Callable[[float, np.ndarray], float]:
    """(t, a) -> R(t, q(t, a)): the perturbing Hamiltonian carried to element space."""
    n = chart.n_dof

    def h(t, el):
        return R(t, chart.to_phase(element_array(el), t)[:n])

    return h


def pullback_rates(chart: MotionChart, R: DisturbingFunction, t: float, el, step: float = 1e-6) -> np.ndarray:
    """Hamiltonian vector field of the pulled-back R on element space.

    da_i/dt = {R~, a_i} = sum_j dR~/da_j {a_j, a_i}, with dR~/da taken by
    central differences of the composed function (no chain rule).
    """
    a = element_array(el)
    h = pullback_hamiltonian(chart, R)
    grad = gradient(lambda b: h(t, b), a, step)
    P = poisson_matrix(chart, chart.to_phase(a, t), t)
    return P.T @ grad
