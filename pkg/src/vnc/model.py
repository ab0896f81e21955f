"""Mechanical control systems with linear velocity constraints.

A problem is the triple ``(ChartSystem, ConstraintSet, InputSet)``: the
ambient mechanical system, the m one-forms whose common kernel is the
distribution to stabilize, and the m actuating forces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry
from .errors import DimensionMismatch, TransversalityFailure
from .geometry import FD_STEP, RCOND_MIN, MetricField, OneFormField, VectorFieldOnQ


def _zero_potential(q):
    return 0.0


@dataclass(frozen=True)
class ChartSystem:
    """Ambient mechanical system: metric, potential and external force in one chart.

    ``potential_gradient`` optionally supplies ``dV/dq`` in closed form.
    ``external_force`` maps ``(q, v)`` to a covector (it is sharped through
    the metric before entering the dynamics); ``None`` means no force.
    """

    dim: int
    coord_names: tuple[str, ...]
    metric: MetricField
    potential: Callable[[np.ndarray], float] = _zero_potential
    potential_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    external_force: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = "system"

    def __post_init__(self):
        object.__setattr__(self, "coord_names", tuple(self.coord_names))
        if len(self.coord_names) != self.dim:
            raise DimensionMismatch("need one coordinate name per dimension")
        if self.metric.dim != self.dim:
            raise DimensionMismatch("metric dimension differs from system dimension")
        if self.potential is _zero_potential and self.potential_gradient is None:
            object.__setattr__(self, "potential_gradient", lambda q: np.zeros(self.dim))

    def grad_potential(self, q, fd_step: float = FD_STEP) -> np.ndarray:
        return geometry.grad_potential(self.metric, self.potential, q, fd_step,
                                       gradient=self.potential_gradient)

    def force_vector(self, q, v) -> np.ndarray:
        """``Y0 = sharp(F0(q, v))``, zero when there is no external force."""
        if self.external_force is None:
            return np.zeros(self.dim)
        return geometry.sharp(self.metric, q, self.external_force(q, v))

    def drift_acceleration(self, q, v, fd_step: float = FD_STEP) -> np.ndarray:
        """Uncontrolled acceleration: geodesic spray + Y0 - grad V."""
        a = geometry.geodesic_spray(self.metric, q, v, fd_step)
        if self.external_force is not None:
            a = a + self.force_vector(q, v)
        if self.potential is _zero_potential:
            return a
        return a - self.grad_potential(q, fd_step)

    def energy(self, q, v) -> float:
        v = np.asarray(v, dtype=float)
        G, _ = self.metric.inverse(q)
        return float(0.5 * v @ G @ v + self.potential(np.asarray(q, dtype=float)))


@dataclass(frozen=True)
class ConstraintSet:
    """The constraint one-forms ``mu^b``; their kernel is the distribution D."""

    forms: tuple[OneFormField, ...]

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        dims = {f.dim for f in self.forms}
        if len(dims) > 1:
            raise DimensionMismatch("constraint forms have different dimensions")

    @property
    def m(self) -> int:
        return len(self.forms)

    def matrix(self, q) -> np.ndarray:
        """``(m, n)`` array of covectors at q."""
        if not self.forms:
            return np.zeros((0, 0))
        return np.array([f(q) for f in self.forms])

    def jacobians(self, q, fd_step: float = FD_STEP) -> np.ndarray:
        """``(m, n, n)`` array ``d mu^b_i / dq^j``."""
        return np.array([f.jacobian(q, fd_step) for f in self.forms])


@dataclass(frozen=True)
class InputSet:
    """Control forces, given as one-forms ``f^a`` or directly as vector fields ``Y^a``.

    When only one-forms are given, the vector fields are obtained by
    sharping through ``metric``. The vector fields are authoritative.
    """

    forms: tuple[OneFormField, ...] = ()
    vectors: tuple[VectorFieldOnQ, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        object.__setattr__(self, "vectors", tuple(self.vectors))
        if not self.vectors and not self.forms:
            raise DimensionMismatch("an input set needs forms or vectors")
        if self.forms and self.vectors and len(self.forms) != len(self.vectors):
            raise DimensionMismatch("forms and vectors disagree in number")

    @classmethod
    def from_forms(cls, metric: MetricField, forms: Sequence[OneFormField]) -> "InputSet":
        forms = tuple(forms)
        vectors = tuple(
            VectorFieldOnQ(f.dim, lambda q, f=f: geometry.sharp(metric, q, f(q))) for f in forms)
        return cls(forms=forms, vectors=vectors)

    @property
    def m(self) -> int:
        return len(self.vectors)

    def matrix(self, q) -> np.ndarray:
        """``(n, m)`` array whose columns are the ``Y^a`` at q."""
        return np.array([Y(q) for Y in self.vectors]).T


@dataclass(frozen=True)
class State:
    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        v = np.array(self.v, dtype=float)
        if q.ndim != 1 or q.shape != v.shape:
            raise DimensionMismatch("q and v must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise ValueError("state entries must be finite")
        q.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)


def _trusted_state(q: np.ndarray, v: np.ndarray) -> State:
    """Wrap arrays the caller guarantees are valid, skipping copies and checks."""
    state = object.__new__(State)
    object.__setattr__(state, "q", q)
    object.__setattr__(state, "v", v)
    return state


def mu_hat(constraints: ConstraintSet, state: State) -> np.ndarray:
    """Fiberwise-linear constraint values ``mu^b_i(q) v^i``."""
    if constraints.m == 0:
        return np.zeros(0)
    return constraints.matrix(state.q) @ state.v


def _pairing(constraints: ConstraintSet, inputs: InputSet, q) -> np.ndarray:
    """``M[b, a] = mu^b(Y^a)``; note this is the transpose of ``C[a, b]``."""
    if constraints.m != inputs.m:
        raise DimensionMismatch(
            f"{inputs.m} inputs for {constraints.m} constraints; C must be square")
    return constraints.matrix(q) @ inputs.matrix(q)


@dataclass(frozen=True)
class TransversalityReport:
    rank_mu: int
    rank_c: int
    rcond: float
    margin: float
    m: int

    @property
    def ok(self) -> bool:
        return (self.rank_mu == self.m and self.rank_c == self.m
                and self.rcond >= RCOND_MIN and self.margin >= RCOND_MIN)


def check_transversality(constraints: ConstraintSet, inputs: InputSet, q) -> TransversalityReport:
    """Diagnose whether D and the input distribution meet only in zero at q.

    ``rcond`` is the reciprocal condition number of C. ``margin`` is the
    smallest singular value of C after normalizing each mu^b and Y^a to
    unit length; unlike rcond it also detects a vanishing 1x1 C.
    Never raises for ill-conditioned data.
    """
    mu = constraints.matrix(q)
    Y = inputs.matrix(q)
    m = constraints.m
    rank_mu = int(np.linalg.matrix_rank(mu)) if m else 0
    C = (mu @ Y).T if m == inputs.m else np.zeros((0, 0))
    if C.size == 0 or not np.all(np.isfinite(C)):
        return TransversalityReport(rank_mu, 0, 0.0 if m else 1.0, 0.0 if m else 1.0, m)
    rank_c = int(np.linalg.matrix_rank(C))
    rcond = geometry.reciprocal_condition(C)
    scale = np.outer(np.linalg.norm(Y, axis=0), np.linalg.norm(mu, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(scale > 0, C / scale, 0.0)
    margin = float(np.linalg.svd(normalized, compute_uv=False)[-1])
    return TransversalityReport(rank_mu, rank_c, rcond, margin, m)


def c_matrix(constraints: ConstraintSet, inputs: InputSet, q) -> np.ndarray:
    """``C[a, b] = mu^b(Y^a)``; raises TransversalityFailure if it is not safely invertible."""
    C = _pairing(constraints, inputs, q).T
    require_transversal(constraints.matrix(q), inputs.matrix(q), C)
    return C


def c_inverse(constraints: ConstraintSet, inputs: InputSet, q) -> np.ndarray:
    """Matrix inverse of :func:`c_matrix`."""
    return geometry.checked_inverse(c_matrix(constraints, inputs, q), TransversalityFailure, "C")


def require_transversal(mu: np.ndarray, Y: np.ndarray, C: np.ndarray) -> None:
    """Raise TransversalityFailure unless ``C`` (built from ``mu`` and ``Y``) is safely invertible."""
    if C.shape == (1, 1):
        # rcond of a nonzero scalar is always 1; compare against the operand scales instead
        c = float(C[0, 0])
        scale = math.sqrt(float(mu[0] @ mu[0]) * float(Y[:, 0] @ Y[:, 0]))
        if not abs(c) > RCOND_MIN * scale:
            raise TransversalityFailure(f"mu(Y) = {c:.3e}: input lies in the constraint distribution")
        return
    rc = geometry.reciprocal_condition(C)
    if not rc >= RCOND_MIN:
        raise TransversalityFailure(f"C is singular or ill-conditioned (rcond={rc:.3e})")
