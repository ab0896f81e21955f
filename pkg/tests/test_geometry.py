import numpy as np
import pytest

from vnc import geometry
from vnc.errors import MetricSingular, NumericalFailure, RankDeficientConstraints
from vnc.geometry import MetricField, OneFormField
from vnc.model import ConstraintSet
from vnc.random_systems import nonflat_metric, polar_metric, random_metric


def const_metric(diag):
    G = np.diag(np.asarray(diag, dtype=float))
    return MetricField(len(diag), lambda q: G)


def test_christoffel_vanishes_for_constant_metric():
    gamma = geometry.christoffel(const_metric([2.0, 2.0, 1.5]), np.array([0.3, -1.0, 2.0]))
    assert np.array_equal(gamma, np.zeros((3, 3, 3)))


@pytest.mark.parametrize("analytic", [True, False])
def test_christoffel_polar(analytic):
    metric = polar_metric() if analytic else MetricField(2, polar_metric().eval)
    gamma = geometry.christoffel(metric, np.array([2.0, 0.0]))
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -2.0
    expected[1, 0, 1] = expected[1, 1, 0] = 0.5
    assert np.allclose(gamma, expected, atol=1e-9 if not analytic else 1e-15)


def test_christoffel_is_symmetric_in_lower_indices(rng):
    metric = random_metric(rng, 4)
    gamma = geometry.christoffel(metric, rng.normal(size=4))
    assert np.array_equal(gamma, np.transpose(gamma, (0, 2, 1)))


def test_christoffel_fd_matches_analytic(rng):
    metric = nonflat_metric()
    fd = MetricField(3, metric.eval)
    for _ in range(10):
        q = rng.uniform(-2, 2, 3)
        exact = geometry.christoffel(metric, q)
        assert np.max(np.abs(geometry.christoffel(fd, q) - exact)) <= 5e-6 * np.max(np.abs(exact))


def test_singular_metric_raises():
    metric = const_metric([1.0, 0.0])
    with pytest.raises(MetricSingular):
        geometry.christoffel(metric, np.zeros(2))


def test_indefinite_metric_raises():
    with pytest.raises(MetricSingular):
        const_metric([1.0, -1.0]).inverse(np.zeros(2))


def test_asymmetric_metric_raises():
    metric = MetricField(2, lambda q: np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(MetricSingular):
        metric.matrix(np.zeros(2))


def test_nonfinite_partials_raise():
    metric = MetricField(2, lambda q: np.eye(2), lambda q: np.full((2, 2, 2), np.nan))
    with pytest.raises(NumericalFailure):
        geometry.christoffel(metric, np.zeros(2))


def test_geodesic_spray_examples():
    assert np.array_equal(
        geometry.geodesic_spray(const_metric([2, 2, 1.5]), np.ones(3), np.array([1.0, 2, 3])),
        np.zeros(3))
    a = geometry.geodesic_spray(polar_metric(), np.array([2.0, 0.0]), np.array([0.0, 1.0]))
    assert np.allclose(a, [2.0, 0.0], atol=1e-15)
    assert np.array_equal(
        geometry.geodesic_spray(polar_metric(), np.array([2.0, 0.0]), np.zeros(2)), np.zeros(2))


def test_sharp_examples():
    metric = const_metric([2.0, 2.0, 1.5])
    th = 0.7
    Y = geometry.sharp(metric, np.zeros(3), np.array([np.sin(th), -np.cos(th), 0.0]))
    assert np.allclose(Y, [np.sin(th) / 2, -np.cos(th) / 2, 0.0], atol=1e-15)
    omega = np.array([0.3, -4.0])
    assert np.allclose(geometry.sharp(const_metric([1, 1]), np.zeros(2), omega), omega)
    assert np.array_equal(geometry.sharp(metric, np.zeros(3), np.zeros(3)), np.zeros(3))


def test_flat_inverts_sharp(rng):
    metric = random_metric(rng, 4)
    q, w = rng.normal(size=4), rng.normal(size=4)
    assert np.allclose(geometry.flat(metric, q, geometry.sharp(metric, q, w)), w, atol=1e-12)


def test_grad_potential_examples():
    q = np.array([0.4, -1.3])
    assert np.array_equal(geometry.grad_potential(const_metric([1, 1]), lambda q: 0.0, q,
                                                  gradient=lambda q: np.zeros(2)), np.zeros(2))
    grad = geometry.grad_potential(const_metric([1, 1]), lambda q: 0.5 * q @ q, q)
    assert np.allclose(grad, q, atol=1e-9)
    grad = geometry.grad_potential(const_metric([2, 2]), lambda q: q[0], q)
    assert np.allclose(grad, [0.5, 0.0], atol=1e-10)


def test_projectors_on_distribution_vector(sleigh):
    metric = sleigh.system.metric
    q = np.array([1.0, 1.0, 0.4])
    P, Qp = geometry.orthogonal_projectors(metric, sleigh.constraints, q)
    v = np.array([np.cos(0.4), np.sin(0.4), 3.0])  # mu v = 0
    assert np.allclose(P @ v, v, atol=1e-14)
    assert np.allclose(Qp @ v, 0.0, atol=1e-14)


def test_projectors_sleigh_theta_zero(sleigh):
    _, Qp = geometry.orthogonal_projectors(sleigh.system.metric, sleigh.constraints, np.zeros(3))
    assert np.allclose(Qp, np.diag([0.0, 1.0, 0.0]), atol=1e-15)


def test_projectors_without_constraints():
    P, Qp = geometry.orthogonal_projectors(const_metric([1, 2]), ConstraintSet(()), np.zeros(2))
    assert np.array_equal(P, np.eye(2))
    assert np.array_equal(Qp, np.zeros((2, 2)))


def test_projectors_rank_deficient():
    form = OneFormField(3, lambda q: np.array([1.0, 0.0, 0.0]))
    with pytest.raises(RankDeficientConstraints):
        geometry.orthogonal_projectors(const_metric([1, 1, 1]), ConstraintSet((form, form)),
                                       np.zeros(3))


def test_projector_identities(rng):
    for _ in range(20):
        metric = random_metric(rng, 5)
        mu = rng.normal(size=(2, 5))
        q = rng.normal(size=5)
        P, Qp = geometry.orthogonal_projectors(metric, mu, q)
        G = metric.matrix(q)
        assert np.allclose(P @ P, P, atol=1e-12)
        assert np.allclose(P + Qp, np.eye(5), atol=1e-14)
        assert np.allclose(G @ P, (G @ P).T, atol=1e-12)  # G-self-adjoint
        assert np.allclose(mu @ P, 0.0, atol=1e-12)


def test_one_form_fd_jacobian_matches_analytic(rng):
    B = rng.normal(size=(3, 3))
    form = OneFormField(3, lambda q: B @ np.sin(q), lambda q: B * np.cos(q)[None, :])
    fd = OneFormField(3, form.eval)
    q = rng.normal(size=3)
    assert np.allclose(fd.jacobian(q), form.jacobian(q), atol=1e-9)


def test_metric_eval_is_deterministic(rng):
    metric = random_metric(rng, 3)
    q = rng.normal(size=3)
    assert np.array_equal(metric.matrix(q), metric.matrix(q.copy()))
