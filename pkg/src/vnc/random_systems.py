"""Random smooth problems with closed-form derivatives, for property checks.

Metric, constraint forms, input forms and potential are trigonometric
perturbations of random constant data, so every derivative is available
exactly and finite differences can be checked against it.
"""
from __future__ import annotations

import numpy as np

from .geometry import MetricField, OneFormField
from .model import ChartSystem, ConstraintSet, InputSet


def _sym(rng, n):
    A = rng.normal(size=(n, n))
    return 0.5 * (A + A.T)


def random_metric(rng: np.random.Generator, n: int, amplitude: float = 0.3) -> MetricField:
    """``G(q) = G0 + amplitude * sum_k sin(q_k) S_k`` with G0 safely positive definite."""
    A = rng.normal(size=(n, n))
    G0 = A @ A.T + n * np.eye(n)
    S = np.array([_sym(rng, n) for _ in range(n)])
    # keep the perturbation well inside the smallest eigenvalue of G0
    S *= amplitude * np.linalg.eigvalsh(G0)[0] / max(1e-12, np.abs(S).sum(axis=(1, 2)).sum())

    def G(q):
        return G0 + np.tensordot(np.sin(q), S, axes=1)

    def dG(q):
        return np.transpose(np.cos(q)[:, None, None] * S, (1, 2, 0))

    return MetricField(n, G, dG)


def random_form(rng: np.random.Generator, n: int, scale: float = 0.5) -> OneFormField:
    """``omega(q) = a + scale * B sin(q)``."""
    a = rng.normal(size=n)
    B = scale * rng.normal(size=(n, n))
    return OneFormField(n, lambda q: a + B @ np.sin(q), lambda q: B * np.cos(q)[None, :])


def random_problem(rng: np.random.Generator, n: int = 4, m: int = 2, forced: bool = True):
    """Random ``(system, constraints, inputs)``; ``forced`` adds a potential and damping."""
    metric = random_metric(rng, n)
    kwargs = {}
    if forced:
        c = rng.normal(size=n)
        D = rng.normal(size=(n, n))
        D = D @ D.T * 0.1
        kwargs = dict(
            potential=lambda q: float(c @ np.sin(q)),
            potential_gradient=lambda q: c * np.cos(q),
            external_force=lambda q, v: -D @ v,
        )
    system = ChartSystem(n, tuple(f"q{i + 1}" for i in range(n)), metric, name="random", **kwargs)
    constraints = ConstraintSet(tuple(random_form(rng, n) for _ in range(m)))
    inputs = InputSet.from_forms(metric, [random_form(rng, n) for _ in range(m)])
    return system, constraints, inputs


def polar_metric() -> MetricField:
    """``diag(1, q1^2)`` with analytic partials."""
    return MetricField(
        2,
        lambda q: np.array([[1.0, 0.0], [0.0, q[0] ** 2]]),
        lambda q: np.array([[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0 * q[0], 0.0]]]),
    )


def nonflat_metric() -> MetricField:
    """Fixed non-flat 3-D metric with entries and derivatives of order one."""
    def G(q):
        x, y, z = q
        return np.array([
            [2.0 + np.sin(x) * np.cos(y), 0.3 * np.sin(z), 0.2 * np.cos(x + y)],
            [0.3 * np.sin(z), 2.5 + 0.5 * np.cos(x), 0.1 * np.sin(y * z)],
            [0.2 * np.cos(x + y), 0.1 * np.sin(y * z), 1.5 + 0.4 * np.sin(y)],
        ])

    def dG(q):
        x, y, z = q
        d = np.zeros((3, 3, 3))
        d[0, 0] = [np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y), 0.0]
        d[0, 1] = d[1, 0] = [0.0, 0.0, 0.3 * np.cos(z)]
        d[0, 2] = d[2, 0] = [-0.2 * np.sin(x + y), -0.2 * np.sin(x + y), 0.0]
        d[1, 1] = [-0.5 * np.sin(x), 0.0, 0.0]
        d[1, 2] = d[2, 1] = [0.0, 0.1 * z * np.cos(y * z), 0.1 * y * np.cos(y * z)]
        d[2, 2] = [0.0, 0.4 * np.cos(y), 0.0]
        return d

    return MetricField(3, G, dG)
