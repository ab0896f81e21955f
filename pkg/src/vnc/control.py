"""Feedback laws rendering a velocity distribution invariant and attractive.

Along the controlled vector field, the time derivative of the constraint
values splits into a drift part and an input part::

    d/dt mu_hat^b = drift_mu^b + sum_a u_a mu^b(Y^a)

The invariance law cancels the drift part; the stabilizing law additionally
imposes ``d/dt mu_hat = -k mu_hat``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch
from .geometry import FD_STEP
from .model import (ChartSystem, ConstraintSet, InputSet, State, c_matrix, mu_hat,
                    require_transversal)


@dataclass(frozen=True)
class ControlGain:
    k: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and np.isfinite(self.k)):
            raise ValueError(f"gain must be positive and finite, got {self.k}")


@dataclass(frozen=True)
class ControlOutput:
    u: np.ndarray
    mu_hat: np.ndarray
    drift_mu: np.ndarray


def _gain_value(gain) -> float:
    if isinstance(gain, ControlGain):
        return gain.k
    return ControlGain(float(gain)).k


def drift_derivative_of_muhat(system: ChartSystem, constraints: ConstraintSet, state: State,
                              fd_step: float = FD_STEP) -> np.ndarray:
    """Derivative of each ``mu_hat^b`` along the uncontrolled drift.

    Returns ``v^j d_j mu^b_i v^i + mu^b_i a^i`` with ``a`` the geodesic
    spray plus external force minus the potential gradient.
    """
    a = system.drift_acceleration(state.q, state.v, fd_step)
    return _drift_mu(constraints, state.q, state.v, a, constraints.matrix(state.q), fd_step)


def _drift_mu(constraints, q, v, a, mu, fd_step):
    return constraints.jacobians(q, fd_step) @ v @ v + mu @ a


class _LawTerms(NamedTuple):
    u: np.ndarray
    mu_hat: np.ndarray
    drift_mu: np.ndarray
    drift_acc: np.ndarray
    Y: np.ndarray


def law_terms(system, constraints, inputs, q, v, k, fd_step=FD_STEP) -> _LawTerms:
    """Shared evaluation of both laws; ``k = 0`` gives the invariance law.

    Also returns the drift acceleration and the ``(n, m)`` input matrix so
    the caller can assemble the closed-loop vector field without
    recomputing them.
    """
    a = system.drift_acceleration(q, v, fd_step)
    mu = constraints.matrix(q)
    Y = inputs.matrix(q)
    mh = mu @ v
    drift = _drift_mu(constraints, q, v, a, mu, fd_step)
    # u_a C[a, b] = target^b with C[a, b] = mu^b(Y^a), i.e. (mu Y) u = target
    u = solve_inputs(mu, Y, -k * mh - drift)
    return _LawTerms(u, mh, drift, a, Y)


def solve_inputs(mu: np.ndarray, Y: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Solve ``(mu Y) u = target`` after checking transversality."""
    if mu.shape[0] != Y.shape[1]:
        raise DimensionMismatch(
            f"{Y.shape[1]} inputs for {mu.shape[0]} constraints; C must be square")
    M = mu @ Y
    require_transversal(mu, Y, M.T)
    if M.shape == (1, 1):
        return target / M[0, 0]
    return np.linalg.solve(M, target)


def stabilizing_control(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet,
                        state: State, gain=1.0, fd_step: float = FD_STEP) -> ControlOutput:
    """Law driving every ``mu_hat^b`` to zero as ``exp(-k t)``."""
    k = _gain_value(gain)
    t = law_terms(system, constraints, inputs, state.q, state.v, k, fd_step)
    return ControlOutput(t.u, t.mu_hat, t.drift_mu)


def invariance_control(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet,
                       state: State, fd_step: float = FD_STEP) -> ControlOutput:
    """Law keeping the distribution invariant; it only cancels the drift of ``mu_hat``.

    Defined by the same formula off the distribution, where it merely
    freezes the constraint values.
    """
    t = law_terms(system, constraints, inputs, state.q, state.v, 0.0, fd_step)
    return ControlOutput(t.u, t.mu_hat, t.drift_mu)


def control_1d_simplified(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet,
                          state: State, gain=1.0, fd_step: float = FD_STEP) -> float:
    """Scalar form ``u = -(k mu_hat + G(mu_hat)) / mu(Y)`` for a single constraint."""
    if constraints.m != 1 or inputs.m != 1:
        raise DimensionMismatch("the scalar law needs exactly one constraint and one input")
    k = _gain_value(gain)
    muY = c_matrix(constraints, inputs, state.q)[0, 0]
    mh = mu_hat(constraints, state)[0]
    drift = drift_derivative_of_muhat(system, constraints, state, fd_step)[0]
    return float(-k * mh / muY - drift / muY)
