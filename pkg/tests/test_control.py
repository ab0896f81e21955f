import math

import numpy as np
import pytest

from vnc import control, geometry
from vnc.errors import DimensionMismatch, TransversalityFailure
from vnc.geometry import MetricField, OneFormField
from vnc.model import ChartSystem, ConstraintSet, InputSet, State, c_inverse, c_matrix, mu_hat
from vnc.random_systems import random_problem

SLEIGH_IC = State([1.0, 1.0, math.pi], [0.5, 8.0, 0.1])


def random_state(rng, n):
    return State(rng.uniform(-2 * np.pi, 2 * np.pi, n), rng.uniform(-10, 10, n))


def test_drift_sleigh_initial_condition(sleigh):
    d = control.drift_derivative_of_muhat(sleigh.system, sleigh.constraints, SLEIGH_IC)
    assert d == pytest.approx([-0.05], abs=1e-15)


def test_drift_zero_at_rest(sleigh, coin):
    for entry in (sleigh, coin):
        n = entry.system.dim
        d = control.drift_derivative_of_muhat(entry.system, entry.constraints,
                                              State(np.ones(n), np.zeros(n)))
        assert np.array_equal(d, np.zeros(entry.constraints.m))


def test_drift_zero_for_constant_constraints(rng):
    metric = MetricField(3, lambda q: np.diag([1.0, 2.0, 3.0]))
    system = ChartSystem(3, ("a", "b", "c"), metric)
    cons = ConstraintSet((OneFormField(3, lambda q: np.array([1.0, -1.0, 2.0])),))
    d = control.drift_derivative_of_muhat(system, cons, random_state(rng, 3))
    assert np.allclose(d, 0.0, atol=1e-12)


@pytest.mark.parametrize("name", ["sleigh", "sleigh-nonorthogonal", "rolling-coin"])
def test_laws_match_closed_forms(rng, name, request):
    entry = request.getfixturevalue({"sleigh": "sleigh", "sleigh-nonorthogonal": "sleigh_nonorthogonal",
                                     "rolling-coin": "coin"}[name])
    for _ in range(100):
        s = random_state(rng, entry.system.dim)
        u_star = control.stabilizing_control(*entry.problem, s).u
        u_hat = control.invariance_control(*entry.problem, s).u
        assert np.max(np.abs(u_star - entry.reference_laws["stabilizing"](s.q, s.v))) <= 1e-10
        assert np.max(np.abs(u_hat - entry.reference_laws["invariance"](s.q, s.v))) <= 1e-10


def test_sleigh_u_star_at_initial_condition(sleigh):
    assert control.stabilizing_control(*sleigh.problem, SLEIGH_IC).u == pytest.approx([-15.9])


def test_coin_u_star_is_c_inverse_times_c(coin, rng):
    for _ in range(20):
        s = random_state(rng, 4)
        xd, yd, thd, phd = s.v
        phi = s.q[3]
        c1 = -xd + thd * np.cos(phi) - phd * thd * np.sin(phi)
        c2 = -yd + thd * np.sin(phi) + phd * thd * np.cos(phi)
        Cinv = c_inverse(coin.constraints, coin.inputs, s.q)
        u = control.stabilizing_control(*coin.problem, s).u
        assert np.allclose(u, Cinv @ [c1, c2], atol=1e-10)


def test_coin_invariance_law(coin):
    s = State([0.0, 0.0, 0.4, 0.9], [1.0, 2.0, 0.7, -1.3])
    expected = [-2 * 0.7 * -1.3 * np.sin(0.9), 2 * 0.7 * -1.3 * np.cos(0.9)]
    assert np.allclose(control.invariance_control(*coin.problem, s).u, expected, atol=1e-14)


def test_invariance_zero_at_rest(coin):
    assert np.array_equal(control.invariance_control(*coin.problem, State(np.ones(4), np.zeros(4))).u,
                          np.zeros(2))


def test_laws_agree_on_distribution(rng, sleigh, sleigh_nonorthogonal, coin):
    for entry in (sleigh, sleigh_nonorthogonal, coin):
        for _ in range(50):
            s = random_state(rng, entry.system.dim)
            P, _ = geometry.orthogonal_projectors(entry.system.metric, entry.constraints, s.q)
            on = State(s.q, P @ s.v)
            gap = (control.stabilizing_control(*entry.problem, on).u
                   - control.invariance_control(*entry.problem, on).u)
            assert np.max(np.abs(gap)) <= 1e-10


def test_closed_loop_identity_random_systems(rng):
    """drift_mu + mu(Y) u* = -k mu_hat for forced random systems."""
    for _ in range(30):
        problem = random_problem(rng)
        k = rng.uniform(0.2, 3.0)
        s = random_state(rng, 4)
        out = control.stabilizing_control(*problem, s, k)
        C = c_matrix(problem[1], problem[2], s.q)
        lhs = out.drift_mu + C.T @ out.u
        assert np.allclose(lhs, -k * out.mu_hat, atol=1e-10 * (1 + np.abs(out.drift_mu).max()))


def test_gain_linearity(rng, coin):
    s = random_state(rng, 4)
    u1 = control.stabilizing_control(*coin.problem, s, 0.5).u
    u2 = control.stabilizing_control(*coin.problem, s, 2.0).u
    Cinv = c_inverse(coin.constraints, coin.inputs, s.q)
    mh = mu_hat(coin.constraints, s)
    assert np.allclose(u2 - u1, -(2.0 - 0.5) * Cinv.T @ mh, atol=1e-12 * (1 + np.abs(u1).max()))


def test_scalar_law_matches_general_law(rng, sleigh, sleigh_nonorthogonal):
    for entry in (sleigh, sleigh_nonorthogonal):
        for _ in range(20):
            s = random_state(rng, 3)
            scalar = control.control_1d_simplified(*entry.problem, s, 1.0)
            assert scalar == pytest.approx(control.stabilizing_control(*entry.problem, s).u[0],
                                           rel=1e-13, abs=1e-12)


def test_scalar_law_on_distribution_is_invariance_law(sleigh):
    s = State([0.0, 0.0, 0.3], [np.cos(0.3), np.sin(0.3), 1.2])
    assert control.control_1d_simplified(*sleigh.problem, s) == pytest.approx(
        control.invariance_control(*sleigh.problem, s).u[0], abs=1e-14)


def test_scalar_law_rejects_multiple_constraints(coin):
    with pytest.raises(DimensionMismatch):
        control.control_1d_simplified(*coin.problem, State(np.zeros(4), np.zeros(4)))


def test_transversality_failure_in_laws(sleigh):
    # force along the blade direction lies inside D
    metric = sleigh.system.metric
    bad = InputSet.from_forms(metric, [OneFormField(3, lambda q: np.array([np.cos(q[2]), np.sin(q[2]), 0.0]))])
    problem = (sleigh.system, sleigh.constraints, bad)
    with pytest.raises(TransversalityFailure):
        control.stabilizing_control(*problem, SLEIGH_IC)
    with pytest.raises(TransversalityFailure):
        control.control_1d_simplified(*problem, SLEIGH_IC)


def test_gain_must_be_positive(sleigh):
    with pytest.raises(ValueError):
        control.stabilizing_control(*sleigh.problem, SLEIGH_IC, 0.0)
    with pytest.raises(ValueError):
        control.ControlGain(-1.0)
