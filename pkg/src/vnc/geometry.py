"""Chart-local Riemannian geometry on dense arrays.

Everything here works in a single coordinate chart: configurations and
velocities are length-``n`` float arrays, the metric is an ``n x n``
symmetric positive-definite matrix field, and derivatives come either from
user-supplied analytic callbacks or from central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, MetricSingular, NumericalFailure, RankDeficientConstraints

FD_STEP = 1e-5
RCOND_MIN = 1e-12
SYMMETRY_TOL = 1e-12


def checked_inverse(A: np.ndarray, exc: type = MetricSingular, what: str = "matrix") -> np.ndarray:
    """Invert ``A`` (LU with partial pivoting), rejecting ill-conditioned input.

    Raises ``exc`` when ``A`` is exactly singular or its reciprocal
    1-norm condition number is below ``RCOND_MIN``.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros_like(A)
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as err:
        raise exc(f"{what} is singular") from err
    rc = reciprocal_condition(A, Ainv)
    if not rc >= RCOND_MIN:
        raise exc(f"{what} is ill-conditioned (rcond={rc:.3e})")
    return Ainv


def reciprocal_condition(A: np.ndarray, Ainv: Optional[np.ndarray] = None) -> float:
    """Reciprocal condition number of ``A`` in the 1-norm (0.0 if singular)."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 1.0
    if Ainv is None:
        try:
            Ainv = np.linalg.inv(A)
        except np.linalg.LinAlgError:
            return 0.0
    denom = np.abs(A).sum(axis=0).max() * np.abs(Ainv).sum(axis=0).max()
    if not np.isfinite(denom) or denom == 0.0:
        return 0.0
    return float(1.0 / denom)


@dataclass(frozen=True)
class MetricField:
    """Kinetic-energy metric ``G_ij(q)``.

    ``partials``, when given, returns the ``(n, n, n)`` array
    ``dG[i, j, k] = dG_ij/dq^k``. A ``constant`` metric is validated and
    inverted once and has zero derivatives.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    constant: bool = False
    _last: Optional[tuple] = field(default=None, init=False, repr=False, compare=False)

    def matrix(self, q) -> np.ndarray:
        """Evaluate and validate ``G(q)``: symmetric and positive definite."""
        G = np.asarray(self.eval(np.asarray(q, dtype=float)), dtype=float)
        if G.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"metric has shape {G.shape}, expected {(self.dim, self.dim)}")
        if not np.all(np.isfinite(G)):
            raise NumericalFailure("metric has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(G))))
        if np.max(np.abs(G - G.T)) > SYMMETRY_TOL * scale:
            raise MetricSingular("metric is not symmetric")
        return G

    def inverse(self, q) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(G, G^-1)`` at q; raise MetricSingular unless G is well-conditioned SPD.

        The last result is memoized, since one vector-field evaluation asks
        for the inverse at the same q many times.
        """
        q = np.asarray(q, dtype=float)
        key = b"" if self.constant else q.tobytes()
        cached = self._last
        if cached is not None and cached[0] == key:
            return cached[1]
        G = self.matrix(q)
        eig = np.linalg.eigvalsh(G)
        if eig[0] <= 0.0 or eig[0] < RCOND_MIN * eig[-1]:
            raise MetricSingular(
                f"metric is not positive definite or is ill-conditioned (eigenvalues {eig})")
        out = (G, np.linalg.inv(G))
        # single tuple assignment keeps concurrent readers consistent
        object.__setattr__(self, "_last", (key, out))
        return out

    def derivatives(self, q, fd_step: float = FD_STEP) -> np.ndarray:
        """``dG[i, j, k] = dG_ij/dq^k`` from the analytic callback or central differences."""
        if self.constant:
            return np.zeros((self.dim,) * 3)
        q = np.asarray(q, dtype=float)
        if self.partials is not None:
            dG = np.asarray(self.partials(q), dtype=float)
        else:
            dG = central_difference(lambda x: np.asarray(self.eval(x), dtype=float), q, fd_step)
        if not np.all(np.isfinite(dG)):
            raise NumericalFailure("metric partial derivatives are not finite")
        return dG


@dataclass(frozen=True)
class OneFormField:
    """Covector field ``omega_i(q)``; ``partials`` gives ``d omega_i / dq^j`` as ``[i, j]``."""

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    partials: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, q) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(q, dtype=float)), dtype=float)

    def jacobian(self, q, fd_step: float = FD_STEP) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.partials is not None:
            return np.asarray(self.partials(q), dtype=float)
        return central_difference(self, q, fd_step)


@dataclass(frozen=True)
class VectorFieldOnQ:
    """Vector field ``X^i(q)`` on the configuration chart."""

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, q) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(q, dtype=float)), dtype=float)


def central_difference(f: Callable[[np.ndarray], np.ndarray], q: np.ndarray, h: float) -> np.ndarray:
    """Stack ``(f(q + h e_k) - f(q - h e_k)) / 2h`` along a new trailing axis k."""
    if not h > 0:
        raise ValueError("fd_step must be positive")
    q = np.asarray(q, dtype=float)
    cols = []
    for k in range(q.size):
        e = np.zeros_like(q)
        e[k] = h
        cols.append((np.asarray(f(q + e), dtype=float) - np.asarray(f(q - e), dtype=float)) / (2.0 * h))
    out = np.stack(cols, axis=-1)
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("finite-difference derivative is not finite")
    return out


def christoffel(metric: MetricField, q, fd_step: float = FD_STEP) -> np.ndarray:
    """Christoffel symbols ``gamma[i, j, k]`` of the Levi-Civita connection at q.

    gamma^i_jk = 1/2 G^il (d_j G_lk + d_k G_lj - d_l G_jk), symmetrized in (j, k).
    """
    _, Ginv = metric.inverse(q)
    if metric.constant:
        return np.zeros((metric.dim,) * 3)
    dG = metric.derivatives(q, fd_step)
    # lowered[l, j, k] = d_j G_lk + d_k G_lj - d_l G_jk
    lowered = np.transpose(dG, (0, 2, 1)) + dG - np.transpose(dG, (2, 0, 1))
    gamma = 0.5 * np.einsum("il,ljk->ijk", Ginv, lowered)
    return 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))


def geodesic_spray(metric: MetricField, q, v, fd_step: float = FD_STEP) -> np.ndarray:
    """Geodesic acceleration ``a^i = -gamma^i_jk v^j v^k``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (metric.dim,):
        raise DimensionMismatch(f"velocity has shape {v.shape}, expected ({metric.dim},)")
    if metric.constant:
        metric.inverse(q)
        return np.zeros(metric.dim)
    gamma = christoffel(metric, q, fd_step)
    return -(gamma @ v @ v)


def sharp(metric: MetricField, q, omega) -> np.ndarray:
    """Raise an index: ``G^ij omega_j``."""
    _, Ginv = metric.inverse(q)
    return Ginv @ np.asarray(omega, dtype=float)


def flat(metric: MetricField, q, X) -> np.ndarray:
    """Lower an index: ``G_ij X^j``."""
    return metric.matrix(q) @ np.asarray(X, dtype=float)


def grad_potential(metric: MetricField, potential, q, fd_step: float = FD_STEP,
                   gradient: Optional[Callable] = None) -> np.ndarray:
    """Riemannian gradient ``G^ij dV/dq^j``.

    ``gradient`` is an optional analytic callback for ``dV/dq``; otherwise
    the differential is taken by central differences.
    """
    q = np.asarray(q, dtype=float)
    _, Ginv = metric.inverse(q)
    if gradient is not None:
        dV = np.asarray(gradient(q), dtype=float)
    else:
        dV = central_difference(lambda x: np.asarray(potential(x), dtype=float), q, fd_step)
    if not np.all(np.isfinite(dV)):
        raise NumericalFailure("potential gradient is not finite")
    return Ginv @ dV


def covector_matrix(constraints, q) -> np.ndarray:
    """Stack the constraint covectors at q into an ``(m, n)`` array.

    Accepts anything exposing ``matrix(q)`` (a ConstraintSet) or an
    array-like already evaluated at q.
    """
    if hasattr(constraints, "matrix"):
        return constraints.matrix(q)
    return np.atleast_2d(np.asarray(constraints, dtype=float))


def orthogonal_projectors(metric: MetricField, constraints, q) -> tuple[np.ndarray, np.ndarray]:
    """G-orthogonal projectors ``(P, Qp)`` onto the distribution and its complement.

    Qp = G^-1 mu^T (mu G^-1 mu^T)^-1 mu and P = I - Qp.
    """
    n = metric.dim
    _, Ginv = metric.inverse(q)
    mu = covector_matrix(constraints, q)
    if mu.size == 0:
        return np.eye(n), np.zeros((n, n))
    S = mu @ Ginv @ mu.T
    Sinv = checked_inverse(S, RankDeficientConstraints, "constraint Gram matrix mu G^-1 mu^T")
    Qp = Ginv @ mu.T @ Sinv @ mu
    return np.eye(n) - Qp, Qp
