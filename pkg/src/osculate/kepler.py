"""The unperturbed two-body problem with unit mass.

Phase coordinates are ``(q, p)`` with ``p`` the momentum, equal to the
velocity because the mass is one. Elements are the classical Keplerian set
``(sma, ecc, inc, raan, argp, m0)`` with ``m0`` the mean anomaly at ``epoch``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynsys import VectorField
from .errors import NoConvergence, NonElliptic, SingularElement

TWO_PI = 2.0 * math.pi
# ecc below this, or inc within this of 0 or pi, is a chart singularity
SINGULAR_TOL = 1e-9

ELEMENT_NAMES = ("sma", "ecc", "inc", "raan", "argp", "m0")
ANGLE_MASK = (False, False, False, True, True, True)


@dataclass(frozen=True)
class KeplerModel:
    mu: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class PhaseState:
    t: float
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(3)
        p = np.array(self.p, dtype=float).reshape(3)
        if not np.linalg.norm(q) > 0:
            raise ValueError("collision state: |q| must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, t: float, x) -> "PhaseState":
        x = np.asarray(x, dtype=float)
        return cls(t, x[:3], x[3:6])


@dataclass(frozen=True)
class OrbitalElements:
    """Classical elements; angles are normalized to [0, 2pi) on construction.

    ``degenerate`` marks circular or equatorial orbits for which ``raan``
    and/or ``argp`` were set to zero by convention.
    """

    sma: float
    ecc: float
    inc: float
    raan: float
    argp: float
    m0: float
    epoch: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        if not self.sma > 0:
            raise ValueError(f"sma must be positive, got {self.sma}")
        if not 0.0 <= self.ecc < 1.0:
            raise ValueError(f"ecc must lie in [0, 1), got {self.ecc}")
        if not 0.0 <= self.inc <= math.pi:
            raise ValueError(f"inc must lie in [0, pi], got {self.inc}")
        for name in ("raan", "argp", "m0"):
            object.__setattr__(self, name, float(getattr(self, name)) % TWO_PI)

    def as_array(self) -> np.ndarray:
        return np.array([self.sma, self.ecc, self.inc, self.raan, self.argp, self.m0])

    @classmethod
    def from_array(cls, a, epoch: float = 0.0) -> "OrbitalElements":
        a = np.asarray(a, dtype=float)
        return cls(*map(float, a[:6]), epoch=epoch)

    @property
    def is_singular(self) -> bool:
        return (
            self.ecc < SINGULAR_TOL
            or self.inc < SINGULAR_TOL
            or self.inc > math.pi - SINGULAR_TOL
        )


def kepler_field(model: KeplerModel = KeplerModel()) -> VectorField:
    """Hamiltonian vector field dq/dt = p, dp/dt = -mu q/|q|^3 on R^6."""
    mu = model.mu

    def rhs(t, x):
        q = x[:3]
        r = math.sqrt(q @ q)
        return np.concatenate([x[3:], -mu * q / r**3])

    def valid(t, x):
        return bool(x[:3] @ x[:3] > 0)

    return VectorField(6, rhs, valid, name="kepler")


def kepler_hamiltonian(x, model: KeplerModel = KeplerModel()) -> float:
    x = np.asarray(x)
    return 0.5 * float(x[3:] @ x[3:]) - model.mu / math.sqrt(x[:3] @ x[:3])


def energy(state: PhaseState, model: KeplerModel = KeplerModel()) -> float:
    return kepler_hamiltonian(state.vector, model)


def angular_momentum(state: PhaseState) -> np.ndarray:
    return np.cross(state.q, state.p)


def eccentricity_vector(state: PhaseState, model: KeplerModel = KeplerModel()) -> np.ndarray:
    q, p = state.q, state.p
    return np.cross(p, np.cross(q, p)) / model.mu - q / np.linalg.norm(q)


def swept_area_rate(state: PhaseState) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(state.q, state.p)))


def orbital_period(el: OrbitalElements, model: KeplerModel = KeplerModel()) -> float:
    return TWO_PI * math.sqrt(el.sma**3 / model.mu)


def mean_motion(sma: float, mu: float) -> float:
    return math.sqrt(mu / sma**3)


def solve_kepler_equation(mean_anomaly: float, ecc: float, tol: float = 1e-14) -> float:
    """Solve E - ecc sin E = M for the eccentric anomaly E.

    Newton iteration from ``M + ecc sin M`` with a bisection fallback on
    ``[M - ecc, M + ecc]``, which always brackets the root.
    """
    if not 0.0 <= ecc < 1.0:
        raise ValueError("ecc must lie in [0, 1)")
    if not tol > 0:
        raise ValueError("tol must be positive")
    # reduce to (-pi, pi] so the residual is evaluated at small arguments
    turns = math.floor((mean_anomaly + math.pi) / TWO_PI)
    m = mean_anomaly - turns * TWO_PI
    if m <= -math.pi:
        m += TWO_PI
        turns -= 1
    offset = turns * TWO_PI

    def resid(e_anom):
        return e_anom - ecc * math.sin(e_anom) - m

    e_anom = m + ecc * math.sin(m)
    for _ in range(50):
        f = resid(e_anom)
        if abs(f) < tol:
            # one more step polishes to full precision and keeps the map smooth
            return offset + e_anom - f / (1.0 - ecc * math.cos(e_anom))
        e_anom -= f / (1.0 - ecc * math.cos(e_anom))

    lo, hi = m - ecc, m + ecc
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = resid(mid)
        if abs(f) < tol:
            return offset + mid
        if f > 0:
            hi = mid
        else:
            lo = mid
    raise NoConvergence(f"Kepler's equation: M={mean_anomaly}, ecc={ecc}, tol={tol}")


def _rotation(raan: float, inc: float, argp: float) -> np.ndarray:
    """Perifocal-to-inertial rotation R3(-raan) R1(-inc) R3(-argp)."""
    cO, sO = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    return np.array(
        [
            [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
            [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
            [sw * si, cw * si, ci],
        ]
    )


def state_vector(a, mu: float, epoch: float, t: float) -> np.ndarray:
    """Phase vector (q, p) at time ``t`` from a raw element array.

    Angles may lie outside [0, 2pi); nothing is normalized here.
    """
    sma, ecc, inc, raan, argp, m0 = (float(v) for v in a[:6])
    n = math.sqrt(mu / sma**3)
    E = solve_kepler_equation(m0 + n * (t - epoch), ecc)
    cE, sE = math.cos(E), math.sin(E)
    root = math.sqrt(1.0 - ecc * ecc)
    denom = 1.0 - ecc * cE
    pos = np.array([sma * (cE - ecc), sma * root * sE, 0.0])
    vel = np.array([-sma * n * sE / denom, sma * n * root * cE / denom, 0.0])
    R = _rotation(raan, inc, argp)
    return np.concatenate([R @ pos, R @ vel])


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def element_vector(x, mu: float, t: float, epoch: float | None = None, strict: bool = True):
    """Raw element array from a phase vector at time ``t``; returns (array, degenerate).

    ``m0`` refers to ``epoch`` (defaults to ``t``). Angles are in [0, 2pi).
    Scalar arithmetic throughout: this sits inside every finite-difference
    Jacobian of the chart.
    """
    if epoch is None:
        epoch = t
    q = [float(v) for v in x[:3]]
    p = [float(v) for v in x[3:6]]
    r = math.sqrt(_dot(q, q))
    if not r > 0:
        raise NonElliptic("collision state")
    v2 = _dot(p, p)
    eng = 0.5 * v2 - mu / r
    if eng >= 0:
        raise NonElliptic(f"energy {eng} >= 0: orbit is not elliptic")
    h = _cross(q, p)
    hn = math.sqrt(_dot(h, h))
    if hn <= SINGULAR_TOL * r * math.sqrt(v2 + mu / r):
        raise NonElliptic("rectilinear motion has no orbital plane")
    sma = -mu / (2.0 * eng)
    pxh = _cross(p, h)
    evec = [pxh[k] / mu - q[k] / r for k in range(3)]
    ecc = math.sqrt(_dot(evec, evec))
    if ecc >= 1.0:
        raise NonElliptic(f"ecc {ecc} >= 1")
    inc = math.acos(max(-1.0, min(1.0, h[2] / hn)))
    hhat = [c / hn for c in h]

    circular = ecc < SINGULAR_TOL
    equatorial = inc < SINGULAR_TOL or inc > math.pi - SINGULAR_TOL
    degenerate = circular or equatorial
    if degenerate and strict:
        raise SingularElement(f"chart singularity: ecc={ecc}, inc={inc}")

    if equatorial:
        raan = 0.0
        node = [1.0, 0.0, 0.0]
    else:
        nn = math.hypot(h[0], h[1])
        node = [-h[1] / nn, h[0] / nn, 0.0]
        raan = math.atan2(h[0], -h[1])

    # eccentric anomaly from e cos E = 1 - r/a and e sin E = q.p / sqrt(mu a)
    ecosE = 1.0 - r / sma
    esinE = _dot(q, p) / math.sqrt(mu * sma)
    if circular:
        argp = 0.0
        mean = math.atan2(_dot(_cross(node, q), hhat), _dot(node, q))
    else:
        argp = math.atan2(_dot(_cross(node, evec), hhat), _dot(node, evec))
        E = math.atan2(esinE, ecosE)
        mean = E - ecc * math.sin(E)
    n = math.sqrt(mu / sma**3)
    m0 = (mean - n * (t - epoch)) % TWO_PI
    out = np.array([sma, ecc, inc, raan % TWO_PI, argp % TWO_PI, m0])
    return out, degenerate


def elements_from_state(
    state: PhaseState,
    model: KeplerModel = KeplerModel(),
    epoch: float | None = None,
    strict: bool = False,
) -> OrbitalElements:
    """Osculating elements of ``state``; ``m0`` refers to ``epoch`` (default ``state.t``).

    Circular or equatorial states give ``degenerate=True`` with the undefined
    angles set to zero, or raise SingularElement when ``strict``.
    Raises NonElliptic for unbound or rectilinear states.
    """
    a, degenerate = element_vector(state.vector, model.mu, state.t, epoch, strict)
    return OrbitalElements(
        *map(float, a), epoch=state.t if epoch is None else epoch, degenerate=degenerate
    )


def state_from_elements(
    el: OrbitalElements, model: KeplerModel = KeplerModel(), t: float | None = None
) -> PhaseState:
    """Analytic Kepler propagation of ``el`` to time ``t`` (default: its epoch)."""
    if t is None:
        t = el.epoch
    return PhaseState.from_vector(t, state_vector(el.as_array(), model.mu, el.epoch, t))
