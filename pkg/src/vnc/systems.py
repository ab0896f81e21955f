"""Built-in example systems: the Chaplygin sleigh, its non-orthogonally
actuated variant and the vertical rolling coin.

Each builder returns a :class:`CatalogEntry` holding the problem triple, the
default simulation settings and closed-form control laws used to cross-check
the generic pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sin
from typing import Callable

import numpy as np

from .dynamics import RhsKind
from .geometry import MetricField, OneFormField
from .model import ChartSystem, ConstraintSet, InputSet, State
from .simulation import SimConfig


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    system: ChartSystem
    constraints: ConstraintSet
    inputs: InputSet
    config: SimConfig
    params: dict
    # closed-form laws keyed by "invariance" / "stabilizing", each (q, v) -> u
    reference_laws: dict[str, Callable] = field(default_factory=dict)

    @property
    def problem(self):
        return self.system, self.constraints, self.inputs

    def simulation_config(self, **changes) -> SimConfig:
        return self.config.replace(**changes) if changes else self.config


def _check_positive(**params):
    for key, value in params.items():
        if not (value > 0 and np.isfinite(value)):
            raise ValueError(f"parameter {key} must be positive, got {value}")


def _constant_metric(diag) -> MetricField:
    G = np.diag(np.asarray(diag, dtype=float))
    n = len(diag)
    zeros = np.zeros((n, n, n))
    return MetricField(n, lambda q: G, lambda q: zeros, constant=True)


def _sleigh_mu() -> OneFormField:
    return OneFormField(
        3,
        lambda q: np.array([sin(q[2]), -cos(q[2]), 0.0]),
        lambda q: np.array([[0.0, 0.0, cos(q[2])],
                            [0.0, 0.0, sin(q[2])],
                            [0.0, 0.0, 0.0]]),
    )


def _sleigh_entry(name, m, I, force: OneFormField, t_final=50.0) -> CatalogEntry:
    metric = _constant_metric([m, m, I])
    system = ChartSystem(3, ("x", "y", "theta"), metric, name=name)
    constraints = ConstraintSet((_sleigh_mu(),))
    inputs = InputSet.from_forms(metric, [force])
    config = SimConfig(dt=0.01, t_final=t_final,
                       initial_state=State([1.0, 1.0, pi], [0.5, 8.0, 0.1]),
                       rhs_kind=RhsKind.stabilizing(1.0))

    def u_hat(q, v):
        th = q[2]
        return np.array([-m * v[2] * (cos(th) * v[0] + sin(th) * v[1])])

    def u_star(q, v):
        th = q[2]
        return np.array([-m * v[2] * (cos(th) * v[0] + sin(th) * v[1])
                         - m * (v[0] * sin(th) - v[1] * cos(th))])

    return CatalogEntry(name, system, constraints, inputs, config, {"m": m, "I": I},
                        {"invariance": u_hat, "stabilizing": u_star})


def build_sleigh(m: float = 2.0, I: float = 1.5) -> CatalogEntry:
    """Chaplygin sleigh actuated by a force normal to the blade."""
    _check_positive(m=m, I=I)
    force = OneFormField(3, lambda q: np.array([sin(q[2]), -cos(q[2]), 0.0]))
    return _sleigh_entry("sleigh", m, I, force)


def build_sleigh_nonorthogonal(m: float = 2.0, I: float = 1.5) -> CatalogEntry:
    """Sleigh whose single force also torques the heading (not G-orthogonal to D)."""
    _check_positive(m=m, I=I)
    force = OneFormField(3, lambda q: np.array([sin(q[2]), -cos(q[2]), 1.0]))
    return _sleigh_entry("sleigh-nonorthogonal", m, I, force)


def build_rolling_coin(m: float = 2.0, I: float = 1.5, J: float = 1.1) -> CatalogEntry:
    """Vertical rolling coin on the plane, chart (x, y, theta, phi)."""
    _check_positive(m=m, I=I, J=J)
    metric = _constant_metric([m, m, I, J])
    system = ChartSystem(4, ("x", "y", "theta", "phi"), metric, name="rolling-coin")
    mu1 = OneFormField(
        4,
        lambda q: np.array([1.0, 0.0, -cos(q[3]), 0.0]),
        lambda q: np.array([[0.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, sin(q[3])],
                            [0.0, 0.0, 0.0, 0.0]]),
    )
    mu2 = OneFormField(
        4,
        lambda q: np.array([0.0, 1.0, -sin(q[3]), 0.0]),
        lambda q: np.array([[0.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, -cos(q[3])],
                            [0.0, 0.0, 0.0, 0.0]]),
    )
    f1 = OneFormField(4, lambda q: np.array([1.0, 0.0, -cos(q[3]), 1.0]))
    f2 = OneFormField(4, lambda q: np.array([0.0, 1.0, -sin(q[3]), 1.0]))
    constraints = ConstraintSet((mu1, mu2))
    inputs = InputSet.from_forms(metric, [f1, f2])
    config = SimConfig(dt=0.01, t_final=100.0,
                       initial_state=State([1.0, 1.0, pi, pi / 2], [0.5, 8.0, 0.1, -0.1]),
                       rhs_kind=RhsKind.stabilizing(1.0))

    def u_hat(q, v):
        phi = q[3]
        return np.array([-m * v[2] * v[3] * sin(phi), m * v[2] * v[3] * cos(phi)])

    def u_star(q, v):
        # expanded closed form of C_ab (c_1, c_2)
        xd, yd, thd, phd = v
        s, c = sin(q[3]), cos(q[3])
        pre = m**2 / (I + m)
        u1 = pre * (I / m * (-xd + thd * c - phd * thd * s)
                    + yd * c * s - phd * thd * s - xd * s**2)
        u2 = pre * (xd * c * s + phd * thd * c - yd * c**2
                    + I / m * (-yd + thd * s + phd * thd * c))
        return np.array([u1, u2])

    return CatalogEntry("rolling-coin", system, constraints, inputs, config,
                        {"m": m, "I": I, "J": J},
                        {"invariance": u_hat, "stabilizing": u_star})


def coin_c_matrix(phi: float, m: float = 2.0, I: float = 1.5) -> np.ndarray:
    """Closed-form C^{ab} of the rolling coin."""
    c, s = cos(phi), sin(phi)
    return np.array([[1 / m + c**2 / I, c * s / I],
                     [c * s / I, 1 / m + s**2 / I]])


def coin_c_inverse(phi: float, m: float = 2.0, I: float = 1.5) -> np.ndarray:
    """Closed-form inverse of :func:`coin_c_matrix`."""
    c, s = cos(phi), sin(phi)
    return m / (I + m) * np.array([[I + m * s**2, -m * c * s],
                                   [-m * c * s, I + m * c**2]])


CATALOG: dict[str, Callable[..., CatalogEntry]] = {
    "sleigh": build_sleigh,
    "sleigh-nonorthogonal": build_sleigh_nonorthogonal,
    "rolling-coin": build_rolling_coin,
}


def get_system(name: str, **params) -> CatalogEntry:
    try:
        builder = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {', '.join(CATALOG)}") from None
    return builder(**params)
