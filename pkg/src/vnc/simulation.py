"""Fixed-step RK4 integration, trajectory recording and decay diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import RhsKind, evaluate
from .errors import ConfigError, InsufficientData, NumericalFailure, TransversalityFailure
from .geometry import FD_STEP
from .model import ChartSystem, ConstraintSet, InputSet, State, _trusted_state

DECAY_FLOOR = 1e-12
MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_final: float
    initial_state: State
    rhs_kind: RhsKind = field(default_factory=RhsKind)
    record_every: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t_final) and self.t_final >= self.dt):
            raise ConfigError(f"t_final must be at least dt, got {self.t_final}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError(f"record_every must be a positive integer, got {self.record_every}")
        ratio = self.t_final / self.dt
        if ratio > 2**31:
            raise ConfigError("t_final/dt is too large")
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"t_final={self.t_final} is not a whole number of steps of dt={self.dt}")
        if round(ratio) % self.record_every:
            raise ConfigError("the number of steps must be a multiple of record_every")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def replace(self, **changes) -> "SimConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Sampled closed-loop run. Rows of every array correspond to ``times``."""

    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    controls: np.ndarray
    mu_hats: np.ndarray
    energies: np.ndarray
    coord_names: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def states(self) -> list[State]:
        return [State(q, v) for q, v in zip(self.q, self.v)]


@dataclass(frozen=True)
class DecayFit:
    """Per-constraint fit of ``ln|mu_hat^b(t)| = intercept - rate * t``."""

    rates: np.ndarray
    intercepts: np.ndarray
    residuals: np.ndarray
    windows: list[tuple[float, float]]
    n_samples: list[int]


def integrate(system: ChartSystem, constraints: ConstraintSet, inputs: InputSet,
              config: SimConfig, fd_step: float = FD_STEP) -> Trajectory:
    """Integrate with classical RK4 at fixed step ``config.dt``.

    Samples are taken at t = 0 and every ``record_every`` steps, the last
    one at ``t_final``. Recorded controls are evaluated at the sample states.
    """
    kind = config.rhs_kind
    dt = config.dt
    n = system.dim
    q = np.array(config.initial_state.q, dtype=float)
    v = np.array(config.initial_state.v, dtype=float)
    if q.shape != (n,):
        raise ConfigError(f"initial state has dimension {q.size}, system has {n}")

    def f(q, v):
        return evaluate(system, constraints, inputs, kind, _trusted_state(q, v), fd_step)

    n_samples = config.n_steps // config.record_every + 1
    times = np.arange(n_samples) * (dt * config.record_every)
    Q = np.empty((n_samples, n))
    V = np.empty((n_samples, n))
    U = np.empty((n_samples, constraints.m))
    MH = np.empty((n_samples, constraints.m))
    E = np.empty(n_samples)

    t = 0.0
    step = 0
    try:
        k1 = f(q, v)
        for s in range(n_samples):
            Q[s], V[s], U[s], MH[s] = q, v, k1.u, k1.mu_hat
            E[s] = system.energy(q, v)
            if s == n_samples - 1:
                break
            for _ in range(config.record_every):
                k2 = f(q + 0.5 * dt * k1.dq, v + 0.5 * dt * k1.dv)
                k3 = f(q + 0.5 * dt * k2.dq, v + 0.5 * dt * k2.dv)
                k4 = f(q + dt * k3.dq, v + dt * k3.dv)
                q = q + (dt / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq)
                v = v + (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv)
                if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
                    raise NumericalFailure(f"state became non-finite after t={t:g}", t=t)
                step += 1
                t = step * dt
                k1 = f(q, v)
    except (NumericalFailure, TransversalityFailure) as err:
        if err.t is None:
            err.t = t
        raise
    except ValueError as err:
        raise NumericalFailure(f"non-finite values after t={t:g}: {err}", t=t) from err

    meta = {"system": system.name, "law": kind.law.value, "gain": kind.gain, "dt": dt,
            "record_every": config.record_every}
    return Trajectory(times, Q, V, U, MH, E, system.coord_names, meta)


def default_window(traj: Trajectory) -> tuple[float, float]:
    return (float(traj.times[0]), float(min(10.0, traj.times[-1])))


def fit_decay_rate(traj_or_times, window: Optional[tuple[float, float]] = None,
                   mu_hats: Optional[np.ndarray] = None) -> DecayFit:
    """Least-squares fit of ``ln|mu_hat|`` against time, one line per constraint.

    Accepts a Trajectory, or raw ``times`` with an ``(N, m)`` ``mu_hats`` array.
    Samples with ``|mu_hat| < DECAY_FLOOR`` are dropped.
    """
    if isinstance(traj_or_times, Trajectory):
        times, values = traj_or_times.times, traj_or_times.mu_hats
    else:
        times = np.asarray(traj_or_times, dtype=float)
        values = np.asarray(mu_hats, dtype=float)
    values = values.reshape(len(times), -1)
    if len(times) == 0:
        raise InsufficientData("empty trajectory")
    if window is None:
        window = (float(times[0]), float(min(10.0, times[-1])))
    lo, hi = window
    if hi < lo:
        raise ValueError(f"window {window} is reversed")
    in_window = (times >= lo - 1e-12) & (times <= hi + 1e-12)

    rates, intercepts, residuals, windows, counts = [], [], [], [], []
    for b in range(values.shape[1]):
        mask = in_window & (np.abs(values[:, b]) >= DECAY_FLOOR) & np.isfinite(values[:, b])
        t = times[mask]
        if t.size < MIN_FIT_SAMPLES:
            raise InsufficientData(
                f"constraint {b + 1}: only {t.size} usable samples in window {window}")
        y = np.log(np.abs(values[mask, b]))
        (slope, intercept), res, *_ = np.polyfit(t, y, 1, full=True)
        rates.append(-slope)
        intercepts.append(intercept)
        residuals.append(math.sqrt(res[0] / t.size) if res.size else 0.0)
        windows.append((float(t[0]), float(t[-1])))
        counts.append(int(t.size))
    return DecayFit(np.array(rates), np.array(intercepts), np.array(residuals), windows, counts)


def constraint_violation_norm(traj: Trajectory) -> np.ndarray:
    """Euclidean norm of the constraint values at every sample."""
    return np.linalg.norm(traj.mu_hats, axis=1)
