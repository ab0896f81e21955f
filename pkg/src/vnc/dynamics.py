"""Right-hand sides of the open-loop, closed-loop and constrained dynamics."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import control
from .geometry import FD_STEP, checked_inverse
from .errors import RankDeficientConstraints
from .model import ChartSystem, ConstraintSet, InputSet, State, mu_hat


class Law(enum.Enum):
    OPEN_LOOP = "open"
    STABILIZING = "stabilizing"
    INVARIANCE = "invariance"
    NONHOLONOMIC = "nonholonomic"


@dataclass(frozen=True)
class RhsKind:
    """Which vector field to integrate; ``gain`` only matters for STABILIZING."""

    law: Law = Law.STABILIZING
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        if not (self.gain > 0 and np.isfinite(self.gain)):
            raise ValueError(f"gain must be positive, got {self.gain}")

    @classmethod
    def open_loop(cls):
        return cls(Law.OPEN_LOOP)

    @classmethod
    def stabilizing(cls, gain=1.0):
        return cls(Law.STABILIZING, gain)

    @classmethod
    def invariance(cls):
        return cls(Law.INVARIANCE)

    @classmethod
    def nonholonomic(cls):
        return cls(Law.NONHOLONOMIC)


class RhsValue(NamedTuple):
    dq: np.ndarray
    dv: np.ndarray
    u: np.ndarray
    mu_hat: np.ndarray


def evaluate(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet, kind: RhsKind,
             state: State, fd_step: float = FD_STEP) -> RhsValue:
    """Evaluate the vector field together with the applied input.

    For the nonholonomic reference the ``u`` slot carries the Lagrange
    multipliers, i.e. the reaction-force magnitudes along ``sharp(mu^b)``.
    """
    q, v = state.q, state.v
    m = constraints.m
    if kind.law is Law.NONHOLONOMIC:
        a_free = system.drift_acceleration(q, v, fd_step)
        _, Ginv = system.metric.inverse(q)
        mu = constraints.matrix(q)
        curvature = constraints.jacobians(q, fd_step) @ v @ v
        S = mu @ Ginv @ mu.T
        lam = -checked_inverse(S, RankDeficientConstraints, "mu G^-1 mu^T") @ (mu @ a_free + curvature)
        return RhsValue(v.copy(), a_free + Ginv @ mu.T @ lam, lam, mu @ v)

    if kind.law is Law.OPEN_LOOP:
        return RhsValue(v.copy(), system.drift_acceleration(q, v, fd_step), np.zeros(m),
                        mu_hat(constraints, state))

    k = kind.gain if kind.law is Law.STABILIZING else 0.0
    terms = control.law_terms(system, constraints, inputs, q, v, k, fd_step)
    return RhsValue(v.copy(), terms.drift_acc + terms.Y @ terms.u, terms.u, terms.mu_hat)


def rhs(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet, kind: RhsKind,
        state: State, fd_step: float = FD_STEP) -> tuple[np.ndarray, np.ndarray]:
    """``(dq, dv)`` of the selected vector field at ``state``."""
    val = evaluate(system, constraints, inputs, kind, state, fd_step)
    return val.dq, val.dv


def energy(system: ChartSystem, state: State) -> float:
    """Kinetic plus potential energy ``1/2 v^T G v + V(q)``."""
    return system.energy(state.q, state.v)
