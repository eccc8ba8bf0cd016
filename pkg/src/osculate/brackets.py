"""Lagrange parentheses, Poisson brackets and the identities relating them.

Sign convention. The Poisson bracket used throughout is

    {f, g} = sum_k  df/dp_k dg/dq_k - df/dq_k dg/dp_k,

the negative of the convention found in most modern textbooks. With it the
matrix of Lagrange parentheses and the matrix of brackets of the same
coordinates are exact inverses (L P = I, not -I), and Hamilton's equation
reads dg/dt = {H, g}.

Phase coordinates are ordered (q_1..q_n, p_1..p_n) and the canonical matrix
is S = [[0, I], [-I, 0]], so the Lagrange matrix is J^T S J for the chart
Jacobian J and the Poisson matrix is K S^T K^T for its inverse K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynsys import IntegratorConfig, VectorField, flow, flow_jacobian
from .motions import (
    MotionChart,
    chart_jacobian,
    element_array,
    inverse_chart_jacobian,
    phase_array,
)

ScalarField = Callable[[np.ndarray], float]

__all__ = [
    "CanonicalForm",
    "BracketMatrices",
    "canonical_matrix",
    "lagrange_matrix",
    "lagrange_from_jacobian",
    "lagrange_entrywise",
    "poisson_matrix",
    "poisson_from_inverse_jacobian",
    "bracket_matrices",
    "gradient",
    "poisson_bracket",
    "bracket_function",
    "verify_inverse",
    "darboux_pullback_residual",
    "time_independence_residual",
    "flow_symplecticity_residual",
    "jacobi_residual",
    "poisson_theorem_check",
    "hamilton_equation_residual",
]


def canonical_matrix(n: int) -> np.ndarray:
    """S = [[0, I_n], [-I_n, 0]], the matrix of sum_k dq_k ^ dp_k."""
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, i], [-i, z]])


@dataclass(frozen=True)
class CanonicalForm:
    n: int

    @property
    def S(self) -> np.ndarray:
        return canonical_matrix(self.n)


@dataclass(frozen=True)
class BracketMatrices:
    lagrange: np.ndarray
    poisson: np.ndarray
    at_elements: np.ndarray
    at_time: float

    @property
    def inverse_residual(self) -> float:
        eye = np.eye(self.lagrange.shape[0])
        return float(np.max(np.abs(self.lagrange @ self.poisson - eye)))


def lagrange_from_jacobian(J: np.ndarray) -> np.ndarray:
    n = J.shape[0] // 2
    return J.T @ canonical_matrix(n) @ J


def lagrange_entrywise(J: np.ndarray) -> np.ndarray:
    """(a_i, a_j) = sum_k dq_k/da_i dp_k/da_j - dq_k/da_j dp_k/da_i, term by term."""
    n = J.shape[0] // 2
    m = J.shape[1]
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            s = 0.0
            for k in range(n):
                s += J[k, i] * J[n + k, j] - J[k, j] * J[n + k, i]
            out[i, j] = s
    return out


def lagrange_matrix(chart: MotionChart, el, t: float, method: str = "auto") -> np.ndarray:
    """Matrix of Lagrange parentheses (a_i, a_j) of the chart at (el, t)."""
    return lagrange_from_jacobian(chart_jacobian(chart, el, t, method).matrix)


def poisson_from_inverse_jacobian(K: np.ndarray) -> np.ndarray:
    n = K.shape[1] // 2
    return K @ canonical_matrix(n).T @ K.T


def poisson_matrix(chart: MotionChart, state, t: float | None = None, method: str = "auto") -> np.ndarray:
    """Matrix of brackets {a_i, a_j} of the chart coordinates at a phase state."""
    return poisson_from_inverse_jacobian(inverse_chart_jacobian(chart, state, t, method))


def bracket_matrices(chart: MotionChart, el, t: float, method: str = "auto") -> BracketMatrices:
    a = element_array(el)
    x = chart.to_phase(a, t)
    return BracketMatrices(
        lagrange_matrix(chart, a, t, method),
        poisson_matrix(chart, x, t, method),
        a,
        t,
    )


def gradient(f: ScalarField, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient with per-coordinate step ``step * max(1, |x_k|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for k in range(x.size):
        h = step * max(1.0, abs(x[k]))
        plus, minus = x.copy(), x.copy()
        plus[k] += h
        minus[k] -= h
        g[k] = (f(plus) - f(minus)) / (2 * h)
    return g


def poisson_bracket(f: ScalarField, g: ScalarField, x, step: float = 1e-5) -> float:
    """{f, g}(x) = sum_k df/dp_k dg/dq_k - df/dq_k dg/dp_k."""
    x = np.asarray(x, dtype=float)
    n = x.size // 2
    df = gradient(f, x, step)
    dg = gradient(g, x, step)
    return float(df[n:] @ dg[:n] - df[:n] @ dg[n:])


def bracket_function(f: ScalarField, g: ScalarField, step: float = 1e-5) -> ScalarField:
    """The scalar field x -> {f, g}(x)."""
    return lambda x: poisson_bracket(f, g, x, step)


def verify_inverse(chart: MotionChart, el, t: float, method: str = "auto") -> float:
    """max |L P - I| with both matrices taken at the same point of the chart."""
    return bracket_matrices(chart, el, t, method).inverse_residual


def darboux_pullback_residual(chart: MotionChart, el, t: float, method: str = "auto") -> float:
    """Disagreement between the entrywise parentheses and J^T S J for one Jacobian."""
    J = chart_jacobian(chart, el, t, method).matrix
    return float(np.max(np.abs(lagrange_entrywise(J) - lagrange_from_jacobian(J))))


def time_independence_residual(
    chart: MotionChart, el, t1: float, t2: float, which: str = "lagrange", method: str = "auto"
) -> float:
    """max |M(el, t1) - M(el, t2)| for the Lagrange or Poisson matrix M."""
    if t1 == t2:
        return 0.0
    a = element_array(el)
    if which == "lagrange":
        m1 = lagrange_matrix(chart, a, t1, method)
        m2 = lagrange_matrix(chart, a, t2, method)
    elif which == "poisson":
        m1 = poisson_matrix(chart, chart.to_phase(a, t1), t1, method)
        m2 = poisson_matrix(chart, chart.to_phase(a, t2), t2, method)
    else:
        raise ValueError(f"unknown matrix {which!r}")
    return float(np.max(np.abs(m1 - m2)))


def flow_symplecticity_residual(
    field: VectorField,
    t0: float,
    t1: float,
    x0,
    cfg: IntegratorConfig = IntegratorConfig(),
    fd_step: float = 1e-5,
    richardson: bool = True,
) -> float:
    """max |J^T S J - S| for the flow Jacobian J of a Hamiltonian field."""
    if t1 == t0:
        return 0.0
    J = flow_jacobian(field, t0, x0, t1, cfg, fd_step, richardson=richardson)
    S = canonical_matrix(J.shape[0] // 2)
    return float(np.max(np.abs(J.T @ S @ J - S)))


def jacobi_residual(
    f: ScalarField,
    g: ScalarField,
    h: ScalarField,
    x,
    outer_step: float = 1e-4,
    inner_step: float = 1e-5,
) -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| with nested central differences."""
    total = 0.0
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        total += poisson_bracket(a, bracket_function(b, c, inner_step), x, outer_step)
    return abs(total)


def poisson_theorem_check(
    f: ScalarField,
    g: ScalarField,
    field: VectorField,
    t0: float,
    x0,
    t1: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    step: float = 1e-5,
) -> float:
    """Drift |{f,g}(Phi(t1,t0,x0)) - {f,g}(x0)| of the bracket of two first integrals."""
    x0 = np.asarray(x0, dtype=float)
    x1 = flow(field, t0, x0, t1, cfg)
    return abs(poisson_bracket(f, g, x1, step) - poisson_bracket(f, g, x0, step))


def hamilton_equation_residual(
    chart: MotionChart,
    hamiltonian: ScalarField,
    g: ScalarField,
    el,
    t: float,
    dt: float = 1e-5,
    step: float = 1e-5,
) -> float:
    """|d/dt g(Phi~(t, el)) - {H, g}(Phi~(t, el))|, time derivative by central differences."""
    a = element_array(el)
    lhs = (g(chart.to_phase(a, t + dt)) - g(chart.to_phase(a, t - dt))) / (2 * dt)
    rhs = poisson_bracket(hamiltonian, g, chart.to_phase(a, t), step)
    return abs(lhs - rhs)
