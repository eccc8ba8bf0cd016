import dataclasses
import math

import numpy as np
import pytest

from osculate.dynsys import IntegratorConfig
from osculate.errors import DomainExit, IllConditioned, StepLimitExceeded
from osculate.kepler import KeplerModel, elements_from_state, orbital_period, PhaseState
from osculate.motions import identity_chart, kepler_chart
from osculate.varconst import (
    DisturbingFunction,
    constant_disturbance,
    direct_perturbed,
    element_gradient,
    element_rates_lagrange,
    element_rates_poisson,
    gradient_consistency,
    integrate_varconst,
    inverse_square,
    pullback_hamiltonian,
    pullback_rates,
    reconstruct_trajectory,
    rotating_dipole,
    third_body,
    zero_disturbance,
)
from osculate.dynsys import flow_trajectory
from osculate.kepler import kepler_field

EPS = 1e-3
LOOSE = IntegratorConfig(1e-9, 1e-11)


def test_trivial_disturbances_give_zero_rates(chart, reference):
    for dist in (zero_disturbance(), constant_disturbance(3.7)):
        assert np.array_equal(element_rates_poisson(chart, dist, 0.4, reference), np.zeros(6))
        assert np.array_equal(element_rates_lagrange(chart, dist, 0.4, reference), np.zeros(6))


@pytest.mark.parametrize(
    "dist",
    [inverse_square(EPS), rotating_dipole(1e-4, 0.3), third_body(1e-3, radius=4.0, phase=0.7)],
    ids=lambda d: d.name,
)
def test_rate_forms_agree(chart, reference, dist):
    for t in (0.0, 1.3):
        p = element_rates_poisson(chart, dist, t, reference)
        lg = element_rates_lagrange(chart, dist, t, reference)
        assert np.max(np.abs(p - lg)) < 1e-8


def test_rates_match_direct_oracle(chart, reference):
    # finite difference of osculating elements along the Cartesian perturbed flow
    dist = inverse_square(EPS)
    t, dt = 0.6, 1e-3
    x = chart.to_phase(reference.as_array(), t)
    ends = []
    for s in (-dt, dt):
        traj = direct_perturbed(KeplerModel(), dist, x, t, t + s, IntegratorConfig(1e-13, 1e-15))
        ends.append(chart.to_elements(traj.states[-1], t + s))
    d = ends[1] - ends[0]
    d[3:] = (d[3:] + math.pi) % (2 * math.pi) - math.pi
    fd = d / (2 * dt)
    assert np.max(np.abs(fd - element_rates_poisson(chart, dist, t, reference))) < 1e-5


def test_pullback_value_and_rates(chart, reference):
    R = inverse_square(EPS).negated()
    h = pullback_hamiltonian(chart, R)
    q = chart.to_phase(reference.as_array(), 0.9)[:3]
    assert h(0.9, reference) == pytest.approx(-EPS / float(q @ q), rel=1e-14)
    rates = pullback_rates(chart, R, 0.9, reference)
    ref = element_rates_poisson(chart, inverse_square(EPS), 0.9, reference)
    assert np.max(np.abs(rates - ref)) < 1e-6


def test_pullback_of_zero(chart, reference):
    R = zero_disturbance()
    assert pullback_hamiltonian(chart, R)(0.0, reference) == 0.0
    assert np.array_equal(pullback_rates(chart, R, 0.0, reference), np.zeros(6))


def test_sign_on_canonical_chart():
    # zero field, Omega = c q1: only p1 moves, with dp1/dt = +c
    c = 0.25
    dist = DisturbingFunction(lambda t, q: c * q[0], lambda t, q: np.array([c, 0, 0]))
    rates = element_rates_poisson(identity_chart(), dist, 0.0, np.ones(6))
    assert np.allclose(rates, [0, 0, 0, c, 0, 0], atol=1e-15)


@pytest.mark.parametrize(
    "dist",
    [inverse_square(0.1), rotating_dipole(0.2, 1.1), third_body(0.5, 2.0, 3.0, 0.4)],
    ids=lambda d: d.name,
)
def test_gradients_consistent(dist):
    q = np.array([0.9, -0.4, 0.3])
    assert gradient_consistency(dist, 1.7, q) < 1e-8


def test_negated():
    d = inverse_square(0.1)
    q = np.array([1.0, 1.0, 0.0])
    assert d.negated()(0.0, q) == -d(0.0, q)
    assert np.array_equal(d.negated().grad_q(0.0, q), -d.grad_q(0.0, q))


def test_element_gradient_chain_rule(chart, reference):
    dist = inverse_square(EPS)
    a = reference.as_array()
    h = 1e-6
    fd = np.array([
        (dist(0.0, chart.to_phase(a + h * e, 0.0)[:3]) - dist(0.0, chart.to_phase(a - h * e, 0.0)[:3])) / (2 * h)
        for e in np.eye(6)
    ])
    assert np.max(np.abs(fd - element_gradient(chart, dist, 0.0, a))) < 1e-9


def test_zero_disturbance_keeps_elements(chart, reference):
    et = integrate_varconst(chart, zero_disturbance(), reference, 0.0, 20.0, n_samples=5)
    assert np.max(np.abs(et.elements - reference.as_array())) < 1e-12
    rec = reconstruct_trajectory(chart, et)
    for t, x in zip(rec.times, rec.states):
        assert np.max(np.abs(x - chart.to_phase(reference.as_array(), t))) < 1e-10


def test_direct_zero_is_kepler(chart, reference):
    x0 = chart.to_phase(reference.as_array(), 0.0)
    a = direct_perturbed(KeplerModel(), zero_disturbance(), x0, 0.0, 5.0)
    b = flow_trajectory(kepler_field(), 0.0, x0, 5.0)
    assert np.array_equal(a.states, b.states)


def deviation(chart, el, dist, periods, cfg=LOOSE):
    t1 = periods * orbital_period(el)
    et = integrate_varconst(chart, dist, el, 0.0, t1, cfg, n_samples=periods + 1)
    rec = reconstruct_trajectory(chart, et)
    direct = direct_perturbed(KeplerModel(), dist, rec.states[0], 0.0, t1, cfg, periods + 1)
    return np.max(np.abs(rec.states[:, :3] - direct.states[:, :3])), et, direct


def test_exactness_short(chart, reference):
    dev, _, _ = deviation(chart, reference, rotating_dipole(1e-4, 0.3), 2)
    assert dev < 1e-6


def test_deviation_is_linear_in_epsilon(chart, reference):
    # reconstructed orbit minus Kepler orbit scales with the perturbation strength
    kep = chart.to_phase
    shifts = []
    for eps in (2e-3, 1e-3):
        _, et, _ = deviation(chart, reference, inverse_square(eps), 1)
        shifts.append(np.max(np.abs(reconstruct_trajectory(chart, et).states[-1] - kep(reference.as_array(), et.times[-1]))))
    assert shifts[1] / shifts[0] == pytest.approx(0.5, rel=0.05)


def test_poisson_cache(chart, reference):
    dist = inverse_square(EPS)
    t1 = orbital_period(reference)
    exact = integrate_varconst(chart, dist, reference, 0.0, t1, LOOSE)
    cached = integrate_varconst(chart, dist, reference, 0.0, t1, LOOSE, cache_radius=1e-5)
    assert np.max(np.abs(exact.elements[-1] - cached.elements[-1])) < 1e-6
    assert cached.meta["cache_radius"] == 1e-5


def test_lagrange_form_integration(chart, reference):
    dist = inverse_square(EPS)
    a = integrate_varconst(chart, dist, reference, 0.0, 3.0, LOOSE, form="lagrange")
    b = integrate_varconst(chart, dist, reference, 0.0, 3.0, LOOSE, form="poisson")
    assert np.max(np.abs(a.elements[-1] - b.elements[-1])) < 1e-8
    with pytest.raises(ValueError):
        integrate_varconst(chart, dist, reference, 0.0, 3.0, form="neither")


def test_ill_conditioned(chart, reference):
    with pytest.raises(IllConditioned):
        element_rates_lagrange(chart, inverse_square(EPS), 0.0, reference, max_condition=1.0)


def test_domain_exit():
    # p1 grows at rate c and the chart is declared only for p1 < 1
    c = 0.5
    dist = DisturbingFunction(lambda t, q: c * q[0], lambda t, q: np.array([c, 0, 0]))
    chart = dataclasses.replace(identity_chart(), in_domain=lambda a: a[3] < 1.0)
    with pytest.raises(DomainExit):
        integrate_varconst(chart, dist, np.zeros(6), 0.0, 5.0)
    ok = integrate_varconst(chart, dist, np.zeros(6), 0.0, 1.5)
    assert ok.elements[-1, 3] == pytest.approx(0.75)


def test_domain_exit_at_start(chart):
    with pytest.raises(DomainExit):
        integrate_varconst(chart, inverse_square(EPS), [1.0, 0.0, 0.5, 0, 0, 0], 0.0, 1.0)


def test_escape_is_reported():
    # a strong uniform force unbinds the orbit; sma grows without bound
    chart = kepler_chart()
    with pytest.raises(StepLimitExceeded):
        integrate_varconst(
            chart, rotating_dipole(0.6, 0.0), [1, 0.5, 0.5, 0, math.pi, 0], 0.0, 3.2,
            IntegratorConfig(1e-6, 1e-8, max_steps=300),
        )


def test_orbital_elements_view(chart, reference):
    et = integrate_varconst(chart, inverse_square(EPS), reference, 0.0, 1.0, LOOSE, n_samples=3)
    els = et.orbital_elements()
    assert len(els) == len(et) == 3
    assert all(0 <= e.argp < 2 * math.pi for e in els)
