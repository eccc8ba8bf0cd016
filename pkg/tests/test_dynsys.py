import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from osculate.dynsys import (
    IntegratorConfig,
    VectorField,
    check_composition,
    flow,
    flow_jacobian,
    flow_rk4,
    flow_trajectory,
    linear_field,
    zero_field,
)
from osculate.errors import DomainExit, StepLimitExceeded
from osculate.kepler import kepler_field

CIRCULAR = np.array([1.0, 0, 0, 0, 1.0, 0])


def growth():
    return VectorField(1, lambda t, x: x, name="growth")


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.floats(-50, 50))
def test_zero_field_is_identity(x0, t1):
    assert np.array_equal(flow(zero_field(3), 0.0, x0, t1), np.array(x0))


def test_exponential():
    assert flow(growth(), 0.0, [1.0], 1.0)[0] == pytest.approx(math.e, abs=1e-9)


def test_backward_exponential():
    assert flow(growth(), 1.0, [math.e], 0.0)[0] == pytest.approx(1.0, abs=1e-9)


def test_circular_kepler_period():
    out = flow(kepler_field(), 0.0, CIRCULAR, 2 * math.pi)
    assert np.max(np.abs(out - CIRCULAR)) < 1e-8


def test_same_time_returns_copy():
    x0 = np.array([1.0, 2.0])
    out = flow(zero_field(2), 3.0, x0, 3.0)
    out[0] = 99
    assert x0[0] == 1.0


def test_trajectory_constant_field():
    traj = flow_trajectory(zero_field(2), 0.0, [1.0, 2.0], 5.0, n_samples=2)
    assert [t for t, _ in traj.samples] == [0.0, 5.0]
    assert np.array_equal(traj.states, [[1.0, 2.0], [1.0, 2.0]])


def test_trajectory_linear_solution():
    unit = VectorField(1, lambda t, x: np.ones(1))
    traj = flow_trajectory(unit, 0.0, [0.0], 1.0, n_samples=3)
    assert np.allclose(traj.states[:, 0], [0.0, 0.5, 1.0], atol=1e-14)
    assert len(traj) == 3


def test_trajectory_circular_radius():
    traj = flow_trajectory(kepler_field(), 0.0, CIRCULAR, 2 * math.pi, n_samples=8)
    radii = np.linalg.norm(traj.states[:, :3], axis=1)
    assert np.max(np.abs(radii - 1.0)) < 1e-8


def test_trajectory_rejects_single_sample():
    with pytest.raises(ValueError):
        flow_trajectory(zero_field(1), 0.0, [0.0], 1.0, n_samples=1)


def test_jacobian_same_time_is_exact_identity():
    assert np.array_equal(flow_jacobian(kepler_field(), 2.0, CIRCULAR, 2.0), np.eye(6))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_jacobian_matches_matrix_exponential(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    x0 = rng.normal(size=3)
    J = flow_jacobian(linear_field(A), 0.3, x0, 1.1)
    assert np.max(np.abs(J - expm(A * 0.8))) < 1e-6


def test_linear_flow_matches_expm():
    A = np.array([[0.0, 1.0], [-4.0, -0.1]])
    x0 = np.array([1.0, 0.5])
    assert np.allclose(flow(linear_field(A), 0.0, x0, 3.0), expm(3.0 * A) @ x0, atol=1e-9)


def test_kepler_jacobian_is_symplectic():
    S = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    x0 = np.array([1.0, 0.1, 0.05, -0.05, 1.1, 0.2])
    J = flow_jacobian(kepler_field(), 0.0, x0, 4.0, fd_step=1e-5, richardson=True)
    assert np.max(np.abs(J.T @ S @ J - S)) < 1e-6


def test_composition_trivial():
    assert check_composition(kepler_field(), 1.0, 1.0, 1.0, CIRCULAR) == 0.0


def test_composition_round_trip():
    x0 = np.array([1.0, 0.2, 0.0, 0.0, 1.2, 0.1])
    cfg = IntegratorConfig()
    res = check_composition(kepler_field(), 0.0, 2.5, 0.0, x0, cfg)
    assert res < 10 * cfg.rel_tol * np.linalg.norm(x0)


def test_composition_kepler():
    x0 = np.array([1.0, 0.2, 0.0, 0.0, 1.2, 0.1])
    assert check_composition(kepler_field(), 0.0, 1.0, 3.0, x0) < 1e-8


def test_rk4_agrees_with_adaptive():
    x0 = np.array([1.0, 0, 0, 0, 1.1, 0])
    ref = flow(kepler_field(), 0.0, x0, 2.0)
    assert np.max(np.abs(flow_rk4(kepler_field(), 0.0, x0, 2.0, 2000) - ref)) < 1e-9


def test_step_limit():
    with pytest.raises(StepLimitExceeded):
        flow(kepler_field(), 0.0, CIRCULAR, 100.0, IntegratorConfig(max_steps=10))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_domain_exit_on_collision():
    # radial infall reaches the origin at t = pi/(2 sqrt 2)
    radial = np.array([1.0, 0, 0, 0, 0, 0])
    with pytest.raises(DomainExit):
        flow(kepler_field(), 0.0, radial, 5.0)


def test_domain_exit_at_start():
    with pytest.raises(DomainExit):
        flow(kepler_field(), 0.0, np.zeros(6), 1.0)


@pytest.mark.parametrize("kwargs", [{"rel_tol": 0}, {"abs_tol": -1}, {"max_steps": 0}, {"initial_step": 0.0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_deterministic():
    x0 = np.array([1.0, 0.2, 0.0, 0.0, 1.2, 0.1])
    a = flow(kepler_field(), 0.0, x0, 7.0)
    b = flow(kepler_field(), 0.0, x0, 7.0)
    assert np.array_equal(a, b)
