import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osculate.dynsys import flow
from osculate.errors import SingularNeighborhood
from osculate.kepler import OrbitalElements, PhaseState, orbital_period, state_from_elements
from osculate.motions import (
    chart_jacobian,
    identity_chart,
    inverse_chart_jacobian,
    kepler_chart,
    legendre_transform,
    linear_reparametrization,
    modified_flow,
    oscillator_chart,
)


def random_elements(rng):
    return np.array([
        rng.uniform(0.7, 2.0),
        rng.uniform(0.05, 0.6),
        rng.uniform(0.1, math.pi - 0.1),
        *rng.uniform(0, 2 * math.pi, 3),
    ])


def test_modified_flow_at_epoch(chart, reference):
    assert np.array_equal(modified_flow(chart, reference, 0.0), state_from_elements(reference).vector)


def test_circular_half_period_antipode(chart):
    el = OrbitalElements(1.7, 0.0, 0.5, 0.3, 0.0, 1.1)
    x0 = modified_flow(chart, el, 0.0)
    half = modified_flow(chart, el, orbital_period(el) / 2)
    assert np.max(np.abs(half + x0)) < 1e-9


def test_modified_flow_solves_field(chart, reference):
    x0 = modified_flow(chart, reference, 0.0)
    for t in (0.7, -2.0, 5.5):
        assert np.max(np.abs(flow(chart.field, 0.0, x0, t) - modified_flow(chart, reference, t))) < 1e-8


def test_representative_independence(chart, reference):
    # every state on one solution curve names the same motion
    a = reference.as_array()
    for t in (1.0, 3.3, -4.0):
        x = flow(chart.field, 0.0, chart.to_phase(a, 0.0), t)
        b = chart.to_elements(x, t)
        d = b - a
        d[3:] = (d[3:] + math.pi) % (2 * math.pi) - math.pi
        assert np.max(np.abs(d)) < 1e-8


def test_identity_chart_jacobian():
    ch = identity_chart()
    a = np.arange(6.0)
    assert np.array_equal(chart_jacobian(ch, a, 2.0).matrix, np.eye(6))
    assert np.allclose(chart_jacobian(ch, a, 2.0, method="fd").matrix, np.eye(6), atol=1e-8)
    assert np.array_equal(inverse_chart_jacobian(ch, a, 2.0), np.eye(6))


@pytest.mark.parametrize("t", [0.0, 0.9, 4.0])
def test_oscillator_fd_matches_closed_form(t):
    ch = oscillator_chart(omega=1.7)
    el = np.array([0.4, -1.2])
    fd = chart_jacobian(ch, el, t, method="fd").matrix
    exact = chart_jacobian(ch, el, t, method="analytic").matrix
    assert np.max(np.abs(fd - exact)) < 1e-6
    x = ch.to_phase(el, t)
    fd_inv = inverse_chart_jacobian(ch, x, t, method="fd")
    assert np.max(np.abs(fd_inv - inverse_chart_jacobian(ch, x, t))) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-20, 20))
def test_kepler_jacobians_are_inverse(seed, t):
    ch = kepler_chart()
    a = random_elements(np.random.default_rng(seed))
    J = chart_jacobian(ch, a, t)
    K = inverse_chart_jacobian(ch, ch.to_phase(a, t), t)
    assert np.max(np.abs(J.matrix @ K - np.eye(6))) < 1e-5
    assert np.max(np.abs(K @ J.matrix - np.eye(6))) < 1e-5
    assert J.condition >= 1.0


def test_phase_state_input(chart, reference):
    st_ = state_from_elements(reference, t=0.5)
    K1 = inverse_chart_jacobian(chart, st_)
    K2 = inverse_chart_jacobian(chart, st_.vector, 0.5)
    assert np.array_equal(K1, K2)
    with pytest.raises(ValueError):
        inverse_chart_jacobian(chart, st_.vector)


@pytest.mark.parametrize("index, value", [(1, 5e-8), (2, 5e-8), (2, math.pi - 5e-8)])
def test_singular_neighborhood(chart, reference, index, value):
    a = reference.as_array()
    a[index] = value
    with pytest.raises(SingularNeighborhood):
        chart_jacobian(chart, a, 0.0)


def test_no_closed_form():
    with pytest.raises(ValueError):
        chart_jacobian(kepler_chart(), [1.3, 0.2, 0.4, 1, 2, 0.5], 0.0, method="analytic")


def test_reparametrization_round_trip(chart, reference):
    D = np.diag([2.0, 1, 1, 1, 1, 3.0])
    re = linear_reparametrization(chart, D)
    b = np.linalg.solve(D, reference.as_array())
    x = re.to_phase(b, 1.0)
    assert np.allclose(x, chart.to_phase(reference.as_array(), 1.0))
    assert np.allclose(re.to_elements(x, 1.0), b)


@pytest.mark.parametrize(
    "v, mass, expected",
    [
        ((0, 0, 0), None, (0, 0, 0)),
        ((0, 1, 0), None, (0, 1, 0)),
        ((1, 1, 0), np.diag([2.0, 1, 1]), (2, 1, 0)),
    ],
)
def test_legendre(v, mass, expected):
    assert np.array_equal(legendre_transform(np.ones(3), v, mass), np.array(expected, dtype=float))


def test_legendre_is_kinetic_gradient():
    M = np.array([[2.0, 0.3, 0], [0.3, 1.0, 0.1], [0, 0.1, 1.5]])
    v = np.array([0.2, -0.7, 1.1])
    T = lambda w: 0.5 * w @ M @ w
    h = 1e-6
    grad = np.array([(T(v + h * e) - T(v - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(legendre_transform(np.zeros(3), v, M), grad, atol=1e-9)
