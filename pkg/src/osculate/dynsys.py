"""Flows of time-dependent vector fields on R^n.

The workhorse is an adaptive Dormand-Prince 5(4) integrator with a PI
step-size controller. A fixed-step RK4 routine is kept for reproducibility
checks, and flow Jacobians are obtained by central differences of the
numerical flow map.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import DomainExit, StepLimitExceeded

__all__ = [
    "VectorField",
    "IntegratorConfig",
    "Trajectory",
    "flow",
    "flow_rk4",
    "flow_trajectory",
    "flow_jacobian",
    "check_composition",
    "linear_field",
    "zero_field",
]


def _always_valid(t: float, x: np.ndarray) -> bool:
    return True


@dataclass(frozen=True)
class VectorField:
    """A time-dependent vector field ``dx/dt = eval(t, x)`` on an open set.

    ``validity(t, x)`` declares the open set where ``eval`` may be called.
    """

    dimension: int
    eval: Callable[[float, np.ndarray], np.ndarray]
    validity: Callable[[float, np.ndarray], bool] = _always_valid
    name: str = "field"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.eval(t, x), dtype=float)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    initial_step: Optional[float] = None  # None selects a starting step automatically

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Samples ``(times[i], states[i])`` of a solution from ``t0`` to ``t1``."""

    times: np.ndarray
    states: np.ndarray
    t0: float
    t1: float
    tolerance_used: float
    meta: dict = dc_field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return [(float(t), x) for t, x in zip(self.times, self.states)]

    def __len__(self) -> int:
        return len(self.times)


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

# PI controller constants (Hairer & Wanner's DOPRI5 defaults).
_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


class _Invalid(Exception):
    """Internal signal: a stage point fell outside the field's domain."""


def _checked_eval(field: VectorField, t: float, x: np.ndarray) -> np.ndarray:
    if not field.validity(t, x):
        raise _Invalid
    dx = field(t, x)
    if not np.all(np.isfinite(dx)):
        raise _Invalid
    return dx


def _dp_stages(field, t, x, h, k1):
    """One Dormand-Prince step; returns (x5, k-stack) with k[6] = f(t+h, x5)."""
    k = np.empty((7, x.size))
    k[0] = k1
    for i in range(1, 7):
        xi = x + h * (np.asarray(_A[i]) @ k[:i])
        k[i] = _checked_eval(field, t + _C[i] * h, xi)
    # the last stage row of _A equals _B5, so stage 7 is evaluated at x5
    x5 = x + h * (_B5[:6] @ k[:6])
    return x5, k


def _initial_step(field, t0, x0, f0, direction, cfg):
    # Hairer, Norsett & Wanner, "Solving ODEs I", II.4.
    sk = cfg.abs_tol + cfg.rel_tol * np.abs(x0)
    d0 = np.sqrt(np.mean((x0 / sk) ** 2))
    d1 = np.sqrt(np.mean((f0 / sk) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = _checked_eval(field, t0 + direction * h0, x0 + direction * h0 * f0)
    except _Invalid:
        return h0
    d2 = np.sqrt(np.mean(((f1 - f0) / sk) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _adaptive(field, t0, x0, t1, cfg, grid=None):
    """Integrate from t0 to t1; optionally append accepted step times to ``grid``."""
    x = np.array(x0, dtype=float)
    t = float(t0)
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    try:
        k1 = _checked_eval(field, t, x)
    except _Invalid:
        raise DomainExit(f"initial point outside the domain at t={t}") from None

    h = cfg.initial_step if cfg.initial_step is not None else _initial_step(
        field, t, x, k1, direction, cfg
    )
    h = min(abs(h), span)
    fac_old = 1e-4
    rejected = False
    steps = 0
    if grid is not None:
        grid.append(t)

    while (t1 - t) * direction > 0:
        if steps >= cfg.max_steps:
            raise StepLimitExceeded(
                f"max_steps={cfg.max_steps} reached at t={t} before t1={t1}; "
                "the solution may be escaping its domain"
            )
        steps += 1
        last = abs(t1 - t) <= h * (1 + 1e-12)
        step = (t1 - t) if last else direction * h
        try:
            x5, k = _dp_stages(field, t, x, step, k1)
        except _Invalid:
            h *= 0.25
            rejected = True
            if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
                raise DomainExit(f"solution left the domain near t={t}") from None
            continue

        sk = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x5))
        err_vec = step * (_E @ k) / sk
        err = float(np.max(np.abs(err_vec)))
        fac11 = err**_EXPO1 if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / fac_old**_BETA
            fac = max(1 / _FAC_MAX, min(1 / _FAC_MIN, fac / _SAFE))
            h_new = abs(step) / fac
            if rejected:
                h_new = min(h_new, abs(step))
            fac_old = max(err, 1e-4)
            t = t1 if last else t + step
            x = x5
            k1 = k[6]
            rejected = False
            h = h_new
            if grid is not None:
                grid.append(t)
        else:
            h = abs(step) / min(1 / _FAC_MIN, fac11 / _SAFE)
            rejected = True
    return x


def _fixed_grid(field, grid, x0):
    """Dormand-Prince 5th-order solution on a prescribed sequence of times."""
    x = np.array(x0, dtype=float)
    k1 = _checked_eval(field, grid[0], x)
    for ta, tb in zip(grid[:-1], grid[1:]):
        x, k = _dp_stages(field, ta, x, tb - ta, k1)
        k1 = k[6]
    return x


def flow(
    field: VectorField,
    t0: float,
    x0,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> np.ndarray:
    """Return Phi(t1, t0, x0), the state at ``t1`` of the solution through ``(t0, x0)``.

    Raises DomainExit if the solution leaves the field's domain before ``t1``
    and StepLimitExceeded when ``cfg.max_steps`` is exhausted.
    """
    x0 = np.array(x0, dtype=float)
    if not np.isfinite(t1):
        raise ValueError("t1 must be finite")
    if not field.validity(t0, x0):
        raise DomainExit(f"initial point outside the domain at t={t0}")
    if t1 == t0:
        return x0
    return _adaptive(field, t0, x0, t1, cfg)


def flow_rk4(field: VectorField, t0: float, x0, t1: float, n_steps: int) -> np.ndarray:
    """Classical fixed-step RK4; no error control."""
    x = np.array(x0, dtype=float)
    h = (t1 - t0) / n_steps
    t = float(t0)
    for i in range(n_steps):
        k1 = field(t, x)
        k2 = field(t + h / 2, x + h / 2 * k1)
        k3 = field(t + h / 2, x + h / 2 * k2)
        k4 = field(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
    return x


def flow_trajectory(
    field: VectorField,
    t0: float,
    x0,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    n_samples: int = 2,
) -> Trajectory:
    """Sample the solution at ``n_samples`` equally spaced times in [t0, t1].

    Integration restarts at every sample time, so each sample is an exact
    flow evaluation rather than an interpolant.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    times = np.linspace(t0, t1, n_samples)
    times[0], times[-1] = t0, t1
    states = np.empty((n_samples, field.dimension))
    states[0] = flow(field, t0, x0, t0, cfg)
    for i in range(1, n_samples):
        states[i] = flow(field, times[i - 1], states[i - 1], times[i], cfg)
    return Trajectory(times, states, float(t0), float(t1), cfg.rel_tol)


def flow_jacobian(
    field: VectorField,
    t0: float,
    x0,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    fd_step: float = 1e-6,
    richardson: bool = False,
) -> np.ndarray:
    """Central-difference approximation of d Phi(t1, t0, x) / dx at ``x0``.

    Column j is ``(Phi(x0 + h e_j) - Phi(x0 - h e_j)) / 2h`` with
    ``h = fd_step * max(1, |x0_j|)``. The perturbed solutions reuse the step
    sequence chosen for the nominal one, so the differenced map is smooth in
    ``x0`` (no step-size jitter between seeds).

    With ``richardson=True`` the central differences at ``h`` and ``h/2`` are
    combined as ``(4 D(h/2) - D(h)) / 3``, cancelling the O(h^2) term.
    """
    x0 = np.array(x0, dtype=float)
    n = x0.size
    if t1 == t0:
        return np.eye(n)
    if not field.validity(t0, x0):
        raise DomainExit(f"initial point outside the domain at t={t0}")
    grid: list[float] = []
    _adaptive(field, t0, x0, t1, cfg, grid=grid)

    def central(scale):
        jac = np.empty((n, n))
        for j in range(n):
            h = scale * max(1.0, abs(x0[j]))
            cols = []
            for sign in (1.0, -1.0):
                seed = x0.copy()
                seed[j] += sign * h
                try:
                    if not field.validity(t0, seed):
                        raise _Invalid
                    cols.append(_fixed_grid(field, grid, seed))
                except _Invalid:
                    raise DomainExit(
                        f"finite-difference seed {j}{'+' if sign > 0 else '-'} "
                        "left the domain"
                    ) from None
            jac[:, j] = (cols[0] - cols[1]) / (2 * h)
        return jac

    if not richardson:
        return central(fd_step)
    return (4.0 * central(fd_step / 2) - central(fd_step)) / 3.0


def check_composition(
    field: VectorField,
    t0: float,
    t1: float,
    t2: float,
    x0,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> float:
    """Max-norm of Phi(t2, t1, Phi(t1, t0, x0)) - Phi(t2, t0, x0)."""
    via = flow(field, t1, flow(field, t0, x0, t1, cfg), t2, cfg)
    direct = flow(field, t0, x0, t2, cfg)
    return float(np.max(np.abs(via - direct)))


def zero_field(n: int) -> VectorField:
    return VectorField(n, lambda t, x: np.zeros(n), name="zero")


def linear_field(A) -> VectorField:
    """The autonomous linear field dx/dt = A x."""
    A = np.array(A, dtype=float)
    return VectorField(A.shape[0], lambda t, x: A @ x, name="linear")
