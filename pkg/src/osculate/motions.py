"""Charts on the manifold of motions and their Jacobians.

A chart maps a point ``el`` of element space (a motion, labelled by its
data at a fixed reference epoch) and a time ``t`` to the phase state the
motion occupies at ``t``. ``to_elements`` inverts that map at fixed ``t``.

Three charts are provided: the Kepler element chart, the identity chart of
the zero field (elements are the phase state itself) and the one degree of
freedom harmonic oscillator, whose Jacobians are known in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import kepler
from .dynsys import VectorField, zero_field
from .errors import NonElliptic, SingularElement, SingularNeighborhood

__all__ = [
    "MotionChart",
    "ChartJacobian",
    "kepler_chart",
    "identity_chart",
    "oscillator_chart",
    "linear_reparametrization",
    "modified_flow",
    "chart_jacobian",
    "inverse_chart_jacobian",
    "legendre_transform",
    "element_array",
    "phase_array",
]


def _anywhere(el: np.ndarray) -> bool:
    return True


@dataclass(frozen=True)
class MotionChart:
    """Coordinates on the manifold of motions of an unperturbed system.

    ``to_phase(el, t)`` is the phase vector at time ``t`` of the motion with
    coordinates ``el``; ``to_elements(x, t)`` is its inverse at fixed ``t``.
    ``angle_mask`` flags periodic coordinates, whose finite differences are
    wrapped into (-pi, pi]. Optional ``jacobian`` / ``inverse_jacobian``
    give closed forms used instead of finite differences.
    """

    name: str
    dim: int
    to_phase: Callable[[np.ndarray, float], np.ndarray]
    to_elements: Callable[[np.ndarray, float], np.ndarray]
    epoch: float = 0.0
    fd_step: float = 1e-7
    angle_mask: tuple = ()
    in_domain: Callable[[np.ndarray], bool] = _anywhere
    field: Optional[VectorField] = None
    model: Optional[kepler.KeplerModel] = None
    jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    inverse_jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    @property
    def n_dof(self) -> int:
        return self.dim // 2


@dataclass(frozen=True)
class ChartJacobian:
    """d(q, p)/d(elements) at fixed time; ``condition`` is its 2-norm condition number."""

    matrix: np.ndarray
    at_elements: np.ndarray
    at_time: float

    @cached_property
    def condition(self) -> float:
        # computed on demand: an SVD per Jacobian would dominate element-rate evaluation
        return float(np.linalg.cond(self.matrix))


def element_array(el) -> np.ndarray:
    if isinstance(el, kepler.OrbitalElements):
        return el.as_array()
    return np.array(el, dtype=float).ravel()


def phase_array(state, t: float | None = None) -> tuple[np.ndarray, float]:
    """Split a PhaseState, or a raw vector plus explicit ``t``, into (vector, t)."""
    if isinstance(state, kepler.PhaseState):
        return state.vector, state.t
    if t is None:
        raise ValueError("a raw phase vector needs an explicit time")
    return np.array(state, dtype=float).ravel(), float(t)


def kepler_chart(
    model: kepler.KeplerModel = kepler.KeplerModel(),
    epoch: float = 0.0,
    fd_step: float = 1e-7,
) -> MotionChart:
    """Classical-element chart; ``m0`` is the mean anomaly at ``epoch``."""
    mu = model.mu
    tol = kepler.SINGULAR_TOL

    def to_phase(el, t):
        return kepler.state_vector(el, mu, epoch, t)

    def to_elements(x, t):
        return kepler.element_vector(x, mu, t, epoch, strict=True)[0]

    def in_domain(el):
        return bool(
            el[0] > 0 and tol < el[1] < 1.0 and tol < el[2] < math.pi - tol
        )

    return MotionChart(
        name="kepler",
        dim=6,
        to_phase=to_phase,
        to_elements=to_elements,
        epoch=epoch,
        fd_step=fd_step,
        angle_mask=kepler.ANGLE_MASK,
        in_domain=in_domain,
        field=kepler.kepler_field(model),
        model=model,
    )


def identity_chart(n_dof: int = 3, epoch: float = 0.0) -> MotionChart:
    """Zero field: every motion is constant, so elements equal the phase state."""
    dim = 2 * n_dof
    eye = np.eye(dim)
    return MotionChart(
        name="identity",
        dim=dim,
        to_phase=lambda el, t: np.array(el, dtype=float),
        to_elements=lambda x, t: np.array(x, dtype=float),
        epoch=epoch,
        field=zero_field(dim),
        jacobian=lambda el, t: eye.copy(),
        inverse_jacobian=lambda x, t: eye.copy(),
    )


def oscillator_chart(omega: float = 1.0, epoch: float = 0.0, fd_step: float = 1e-7) -> MotionChart:
    """H = p^2/2 + omega^2 q^2/2 with elements (q0, p0) at ``epoch``."""

    def rot(t):
        c, s = math.cos(omega * (t - epoch)), math.sin(omega * (t - epoch))
        return np.array([[c, s / omega], [-omega * s, c]])

    def rot_inv(t):
        c, s = math.cos(omega * (t - epoch)), math.sin(omega * (t - epoch))
        return np.array([[c, -s / omega], [omega * s, c]])

    field = VectorField(2, lambda t, x: np.array([x[1], -omega**2 * x[0]]), name="oscillator")
    return MotionChart(
        name="oscillator",
        dim=2,
        to_phase=lambda el, t: rot(t) @ np.asarray(el, dtype=float),
        to_elements=lambda x, t: rot_inv(t) @ np.asarray(x, dtype=float),
        epoch=epoch,
        fd_step=fd_step,
        field=field,
        jacobian=lambda el, t: rot(t),
        inverse_jacobian=lambda x, t: rot_inv(t),
    )


def linear_reparametrization(chart: MotionChart, D) -> MotionChart:
    """The chart with new coordinates ``b`` where old coordinates are ``a = D b``.

    Closed-form Jacobians and angle wrapping are dropped: ``b`` mixes
    coordinates in general.
    """
    D = np.array(D, dtype=float)
    D_inv = np.linalg.inv(D)
    return MotionChart(
        name=f"{chart.name}-reparam",
        dim=chart.dim,
        to_phase=lambda b, t: chart.to_phase(D @ np.asarray(b), t),
        to_elements=lambda x, t: D_inv @ chart.to_elements(x, t),
        epoch=chart.epoch,
        fd_step=chart.fd_step,
        in_domain=lambda b: chart.in_domain(D @ np.asarray(b)),
        field=chart.field,
        model=chart.model,
    )


def modified_flow(chart: MotionChart, el, t: float) -> np.ndarray:
    """Phase vector at time ``t`` of the motion ``el``."""
    return np.asarray(chart.to_phase(element_array(el), t), dtype=float)


def _wrap(delta: np.ndarray, mask) -> np.ndarray:
    if not mask:
        return delta
    out = delta.copy()
    for i, is_angle in enumerate(mask):
        if is_angle:
            out[..., i] = (out[..., i] + math.pi) % (2 * math.pi) - math.pi
    return out


def chart_jacobian(chart: MotionChart, el, t: float, method: str = "auto") -> ChartJacobian:
    """d(phase)/d(elements) at fixed ``t``.

    ``method`` is "analytic", "fd" or "auto" (closed form when the chart has
    one). Central differences use ``h_j = fd_step * max(1, |el_j|)``.
    Raises SingularNeighborhood if a seed leaves the chart's domain.
    """
    a = element_array(el)
    use_analytic = method == "analytic" or (method == "auto" and chart.jacobian is not None)
    if use_analytic:
        if chart.jacobian is None:
            raise ValueError(f"chart {chart.name!r} has no closed-form Jacobian")
        m = np.asarray(chart.jacobian(a, t), dtype=float)
        return ChartJacobian(m, a, t)

    m = np.empty((chart.dim, a.size))
    for j in range(a.size):
        h = chart.fd_step * max(1.0, abs(a[j]))
        plus, minus = a.copy(), a.copy()
        plus[j] += h
        minus[j] -= h
        if not (chart.in_domain(plus) and chart.in_domain(minus)):
            raise SingularNeighborhood(
                f"seed for element {j} crosses a chart singularity at {a}"
            )
        try:
            m[:, j] = (chart.to_phase(plus, t) - chart.to_phase(minus, t)) / (2 * h)
        except (SingularElement, NonElliptic) as exc:
            raise SingularNeighborhood(f"seed for element {j}: {exc}") from exc
    return ChartJacobian(m, a, t)


def inverse_chart_jacobian(
    chart: MotionChart, state, t: float | None = None, method: str = "auto"
) -> np.ndarray:
    """d(elements)/d(phase) at fixed time, by central differences of ``to_elements``.

    ``state`` is a PhaseState or a phase vector with explicit ``t``.
    """
    x, t = phase_array(state, t)
    use_analytic = method == "analytic" or (
        method == "auto" and chart.inverse_jacobian is not None
    )
    if use_analytic:
        if chart.inverse_jacobian is None:
            raise ValueError(f"chart {chart.name!r} has no closed-form inverse Jacobian")
        return np.asarray(chart.inverse_jacobian(x, t), dtype=float)

    m = np.empty((chart.dim, x.size))
    for k in range(x.size):
        h = chart.fd_step * max(1.0, abs(x[k]))
        plus, minus = x.copy(), x.copy()
        plus[k] += h
        minus[k] -= h
        try:
            diff = np.asarray(chart.to_elements(plus, t)) - np.asarray(chart.to_elements(minus, t))
        except (SingularElement, NonElliptic) as exc:
            raise SingularNeighborhood(f"seed for phase coordinate {k}: {exc}") from exc
        m[:, k] = _wrap(diff, chart.angle_mask) / (2 * h)
    return m


def legendre_transform(q, v, mass=None) -> np.ndarray:
    """Momenta p = dT/dv for T = v^T M v / 2 (M = identity: unit mass).

    The configuration ``q`` is accepted for the general position-dependent
    case; the kinetic energies used here do not depend on it.
    """
    v = np.asarray(v, dtype=float)
    if mass is None:
        return v.copy()
    return np.asarray(mass, dtype=float) @ v
