import math

import numpy as np
import pytest

from vnc import dynamics, geometry
from vnc.dynamics import Law, RhsKind
from vnc.geometry import MetricField
from vnc.model import ChartSystem, ConstraintSet, State, mu_hat
from vnc.random_systems import random_problem

SLEIGH_IC = State([1.0, 1.0, math.pi], [0.5, 8.0, 0.1])


def test_sleigh_closed_loop_rhs_at_initial_condition(sleigh):
    dq, dv = dynamics.rhs(*sleigh.problem, RhsKind.stabilizing(1.0), SLEIGH_IC)
    u = -15.9
    th = math.pi
    assert np.array_equal(dq, SLEIGH_IC.v)
    assert np.allclose(dv, [u * math.sin(th) / 2, -u * math.cos(th) / 2, 0.0], atol=1e-14)


def test_sleigh_theta_acceleration_is_zero(sleigh, rng):
    for _ in range(10):
        s = State(rng.normal(size=3), rng.normal(size=3))
        assert dynamics.rhs(*sleigh.problem, RhsKind.stabilizing(1.0), s)[1][2] == 0.0


def test_nonorthogonal_sleigh_theta_acceleration(sleigh_nonorthogonal):
    val = dynamics.evaluate(*sleigh_nonorthogonal.problem, RhsKind.stabilizing(1.0), SLEIGH_IC)
    assert val.dv[2] == pytest.approx(val.u[0] / 1.5)
    assert val.dv[2] != 0.0


def test_open_loop_flat_system_has_zero_acceleration(sleigh, coin, rng):
    for entry in (sleigh, coin):
        n = entry.system.dim
        s = State(rng.normal(size=n), rng.normal(size=n))
        assert np.array_equal(dynamics.rhs(*entry.problem, RhsKind.open_loop(), s)[1], np.zeros(n))


def test_nonholonomic_reference_preserves_constraint(coin, rng):
    for _ in range(20):
        q = rng.normal(size=4)
        P, _ = geometry.orthogonal_projectors(coin.system.metric, coin.constraints, q)
        v = P @ rng.normal(size=4)
        dq, dv = dynamics.rhs(*coin.problem, RhsKind.nonholonomic(), State(q, v))
        mu = coin.constraints.matrix(q)
        curvature = coin.constraints.jacobians(q) @ v @ v
        assert np.allclose(mu @ dv + curvature, 0.0, atol=1e-10)


def test_closed_loop_constraint_derivative_is_minus_k_muhat(rng):
    for _ in range(20):
        system, cons, inputs = random_problem(rng)
        k = rng.uniform(0.3, 2.5)
        s = State(rng.uniform(-3, 3, 4), rng.uniform(-3, 3, 4))
        val = dynamics.evaluate(system, cons, inputs, RhsKind.stabilizing(k), s)
        mu = cons.matrix(s.q)
        d_muhat = cons.jacobians(s.q) @ s.v @ s.v + mu @ val.dv
        assert np.allclose(d_muhat, -k * mu_hat(cons, s), atol=1e-10 * (1 + np.abs(val.dv).max()))


def test_invariance_closed_loop_freezes_muhat(coin, rng):
    s = State(rng.normal(size=4), rng.normal(size=4))
    dv = dynamics.rhs(*coin.problem, RhsKind.invariance(), s)[1]
    q, v = s.q, s.v
    assert np.allclose(coin.constraints.jacobians(q) @ v @ v + coin.constraints.matrix(q) @ dv,
                       0.0, atol=1e-12)


def test_energy_examples(sleigh):
    assert dynamics.energy(sleigh.system, SLEIGH_IC) == pytest.approx(64.2575, abs=1e-12)
    assert dynamics.energy(sleigh.system, State(np.ones(3), np.zeros(3))) == 0.0


def test_rhs_kind_validation():
    assert RhsKind.stabilizing(2.0).gain == 2.0
    assert RhsKind.invariance().law is Law.INVARIANCE
    with pytest.raises(ValueError):
        RhsKind.stabilizing(0.0)


def test_rank_deficient_constraints_in_reference():
    from vnc.errors import RankDeficientConstraints
    from vnc.geometry import OneFormField
    from vnc.model import InputSet
    metric = MetricField(3, lambda q: np.eye(3))
    f = OneFormField(3, lambda q: np.array([1.0, 0.0, 0.0]))
    system = ChartSystem(3, ("a", "b", "c"), metric)
    cons = ConstraintSet((f, f))
    inputs = InputSet.from_forms(metric, (f, f))
    with pytest.raises(RankDeficientConstraints):
        dynamics.rhs(system, cons, inputs, RhsKind.nonholonomic(), State(np.zeros(3), np.ones(3)))
