"""Verification checks run by ``vnc verify`` and by the acceptance tests.

Every check returns a :class:`CheckResult`; tolerances are fixed here.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import control, geometry
from .csvio import write_csv
from .dynamics import RhsKind
from .errors import TransversalityFailure
from .model import State, c_inverse, c_matrix, require_transversal
from .plotting import render_figures
from .random_systems import nonflat_metric, random_form, random_metric
from .simulation import fit_decay_rate, integrate
from .systems import CATALOG, coin_c_inverse, coin_c_matrix, get_system

RATE_TOL = 0.01
SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


CHECKS: dict[str, Callable[[], CheckResult]] = {}


def check(name):
    def register(fn):
        def run():
            try:
                return fn(name)
            except Exception as err:  # a crashing check is a failing check
                return CheckResult(name, False, f"raised {type(err).__name__}: {err}")
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        CHECKS[name] = run
        return run
    return register


def random_states(rng, n, count):
    q = rng.uniform(-2 * np.pi, 2 * np.pi, size=(count, n))
    v = rng.uniform(-10, 10, size=(count, n))
    return [State(a, b) for a, b in zip(q, v)]


def _rel(a, b):
    return abs(a - b) / abs(b)


@check("01_decay_sleigh")
def decay_sleigh(name):
    """Paper settings: mu_hat(0) = 8, rate over [0, 10] s within 1% of 1, tail bound at t = 20."""
    entry = get_system("sleigh")
    start = time.perf_counter()
    traj = integrate(*entry.problem, entry.config)
    elapsed = time.perf_counter() - start
    fit = fit_decay_rate(traj, (0.0, 10.0))
    rate = fit.rates[0]
    i20 = int(np.argmin(np.abs(traj.times - 20.0)))
    tail = abs(traj.mu_hats[i20, 0])
    bound = 8.0 * math.exp(-20.0) * 1.05
    ok = (traj.mu_hats[0, 0] == 8.0 and _rel(rate, 1.0) <= RATE_TOL and tail <= bound
          and elapsed < 1.0)
    return CheckResult(name, ok, f"muhat(0)={float(traj.mu_hats[0, 0])!r} rate={rate:.6f} "
                                 f"|muhat(20)|={tail:.4e} (bound {bound:.4e}) runtime={elapsed:.3f}s")


@check("02_decay_rolling_coin")
def decay_coin(name):
    """Paper settings: mu_hat(0) = (0.5, 7.9), both rates over [0, 10] s within 1% of 1."""
    entry = get_system("rolling-coin")
    traj = integrate(*entry.problem, entry.config)
    fit = fit_decay_rate(traj, (0.0, 10.0))
    mh0 = traj.mu_hats[0]
    ok = (np.allclose(mh0, [0.5, 7.9], rtol=0, atol=1e-15)
          and all(_rel(r, 1.0) <= RATE_TOL for r in fit.rates))
    return CheckResult(name, ok, f"muhat(0)={mh0.tolist()} rates={np.round(fit.rates, 6).tolist()}")


@check("03_printed_formulas")
def printed_formulas(name):
    """Generic invariance and stabilizing laws equal the closed forms at 100 random states."""
    rng = np.random.default_rng(SEED)
    worst = {}
    for key in CATALOG:
        entry = get_system(key)
        err = 0.0
        for s in random_states(rng, entry.system.dim, 100):
            u_star = control.stabilizing_control(*entry.problem, s, 1.0).u
            u_hat = control.invariance_control(*entry.problem, s).u
            err = max(err, np.max(np.abs(u_star - entry.reference_laws["stabilizing"](s.q, s.v))),
                      np.max(np.abs(u_hat - entry.reference_laws["invariance"](s.q, s.v))))
        worst[key] = err
    ok = max(worst.values()) <= 1e-10
    return CheckResult(name, ok, "max abs error " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))


@check("04_coin_c_matrix")
def coin_c(name):
    """C and its inverse equal the printed matrices at 100 random phi; C C^-1 = I."""
    rng = np.random.default_rng(SEED + 1)
    entry = get_system("rolling-coin")
    e_c = e_inv = e_id = 0.0
    for phi in rng.uniform(-2 * np.pi, 2 * np.pi, 100):
        q = np.array([0.3, -0.2, 1.1, phi])
        C = c_matrix(entry.constraints, entry.inputs, q)
        Cinv = c_inverse(entry.constraints, entry.inputs, q)
        e_c = max(e_c, np.max(np.abs(C - coin_c_matrix(phi))))
        e_inv = max(e_inv, np.max(np.abs(Cinv - coin_c_inverse(phi))))
        e_id = max(e_id, np.max(np.abs(C @ Cinv - np.eye(2))))
    ok = e_c <= 1e-12 and e_inv <= 1e-12 and e_id <= 1e-10
    return CheckResult(name, ok, f"C err={e_c:.2e} Cinv err={e_inv:.2e} C*Cinv-I={e_id:.2e}")


@check("05_restriction_to_distribution")
def restriction(name):
    """On D both laws agree; runs started on D stay on it for 10 s at dt = 1e-3."""
    rng = np.random.default_rng(SEED + 2)
    gap = 0.0
    drift = {}
    for key in CATALOG:
        entry = get_system(key)
        sysm, cons, inp = entry.problem
        for s in random_states(rng, sysm.dim, 100):
            P, _ = geometry.orthogonal_projectors(sysm.metric, cons, s.q)
            on = State(s.q, P @ s.v)
            gap = max(gap, np.max(np.abs(control.stabilizing_control(sysm, cons, inp, on).u
                                         - control.invariance_control(sysm, cons, inp, on).u)))
        s0 = entry.config.initial_state
        P, _ = geometry.orthogonal_projectors(sysm.metric, cons, s0.q)
        cfg = entry.config.replace(dt=1e-3, t_final=10.0, initial_state=State(s0.q, P @ s0.v),
                                   rhs_kind=RhsKind.stabilizing(1.0), record_every=10)
        traj = integrate(sysm, cons, inp, cfg)
        drift[key] = float(np.max(np.abs(traj.mu_hats)))
    ok = gap <= 1e-10 and max(drift.values()) <= 1e-8
    return CheckResult(name, ok, f"|u*-u_hat| on D={gap:.2e}; max|muhat| "
                       + ", ".join(f"{k}={v:.2e}" for k, v in drift.items()))


@check("06_closed_loop_equals_nonholonomic")
def closed_loop_vs_reference(name):
    """Sleigh: invariance closed loop and Lagrange-multiplier dynamics coincide from a state on D."""
    entry = get_system("sleigh")
    sysm, cons, inp = entry.problem
    s0 = entry.config.initial_state
    P, _ = geometry.orthogonal_projectors(sysm.metric, cons, s0.q)
    base = entry.config.replace(dt=1e-3, t_final=10.0, initial_state=State(s0.q, P @ s0.v),
                                record_every=10)
    a = integrate(sysm, cons, inp, base.replace(rhs_kind=RhsKind.invariance()))
    b = integrate(sysm, cons, inp, base.replace(rhs_kind=RhsKind.nonholonomic()))
    diff = max(np.max(np.abs(a.q - b.q)), np.max(np.abs(a.v - b.v)))
    return CheckResult(name, diff <= 1e-6, f"max state discrepancy={diff:.2e}")


@check("07_decay_gain")
def gain_generalization(name):
    """Sleigh with k in {0.5, 2}: fitted rate over [0, 10] s within 1% of k."""
    entry = get_system("sleigh")
    rates = {}
    for k in (0.5, 2.0):
        cfg = entry.config.replace(t_final=10.0, rhs_kind=RhsKind.stabilizing(k))
        rates[k] = fit_decay_rate(integrate(*entry.problem, cfg), (0.0, 10.0)).rates[0]
    ok = all(_rel(r, k) <= RATE_TOL for k, r in rates.items())
    return CheckResult(name, ok, ", ".join(f"k={k}: rate={r:.6f}" for k, r in rates.items()))


def christoffel_fd_error(q) -> float:
    metric = nonflat_metric()
    exact = geometry.christoffel(metric, q)
    fd = geometry.christoffel(geometry.MetricField(3, metric.eval), q, 1e-5)
    return float(np.max(np.abs(fd - exact)) / np.max(np.abs(exact)))


def metric_compatibility_error(metric, q) -> float:
    """max |d_k G_ij - G_lj gamma^l_ki - G_il gamma^l_kj| with finite-difference partials."""
    fd_metric = geometry.MetricField(metric.dim, metric.eval)
    gamma = geometry.christoffel(fd_metric, q)
    G = metric.matrix(q)
    dG = fd_metric.derivatives(q)  # [i, j, k]
    lhs = np.transpose(dG, (2, 0, 1))  # [k, i, j]
    rhs = np.einsum("lj,lki->kij", G, gamma) + np.einsum("il,lkj->kij", G, gamma)
    return float(np.max(np.abs(lhs - rhs)))


def lemma_samples(rng, count=1000, n=4, m=2):
    """Accepted transversal random samples and the worst reciprocal condition of C among them."""
    accepted = 0
    worst = np.inf
    failures = 0
    while accepted < count:
        metric = random_metric(rng, n)
        mu = np.array([random_form(rng, n)(q := rng.uniform(-np.pi, np.pi, n)) for _ in range(m)])
        Y = np.array([geometry.sharp(metric, q, rng.normal(size=n)) for _ in range(m)]).T
        # D meets F only in zero iff [basis of ker mu | Y] has full rank
        kernel = np.linalg.svd(mu)[2][m:].T
        stacked = np.hstack([kernel, Y / np.linalg.norm(Y, axis=0)])
        if np.linalg.svd(stacked, compute_uv=False)[-1] < 1e-6:
            continue
        accepted += 1
        C = (mu @ Y).T
        try:
            require_transversal(mu, Y, C)
            worst = min(worst, geometry.reciprocal_condition(C))
        except TransversalityFailure:
            failures += 1
    return accepted, failures, worst


@check("08_geometry")
def geometry_check(name):
    """Christoffel FD accuracy, metric compatibility, projector identities, Lemma-1 invertibility."""
    rng = np.random.default_rng(SEED + 3)
    fd_err = max(christoffel_fd_error(rng.uniform(-2, 2, 3)) for _ in range(20))
    compat = 0.0
    for _ in range(20):
        metric = random_metric(rng, 4)
        compat = max(compat, metric_compatibility_error(metric, rng.uniform(-2, 2, 4)))
    compat = max(compat, metric_compatibility_error(nonflat_metric(), rng.uniform(-2, 2, 3)))
    proj = 0.0
    for _ in range(50):
        n, m = 4, 2
        metric = random_metric(rng, n)
        q = rng.uniform(-np.pi, np.pi, n)
        mu = np.array([random_form(rng, n)(q) for _ in range(m)])
        P, Qp = geometry.orthogonal_projectors(metric, mu, q)
        G = metric.matrix(q)
        v, w = rng.normal(size=n), rng.normal(size=n)
        proj = max(proj, np.max(np.abs(P @ P - P)), np.max(np.abs(Qp @ Qp - Qp)),
                   np.max(np.abs(P + Qp - np.eye(n))), abs((P @ v) @ G @ (Qp @ w)),
                   np.max(np.abs(mu @ P @ v)))
    accepted, failures, worst = lemma_samples(rng)
    ok = fd_err <= 5e-6 and compat <= 1e-6 and proj <= 1e-10 and failures == 0
    return CheckResult(name, ok, f"christoffel FD rel err={fd_err:.2e} compat={compat:.2e} "
                                 f"projectors={proj:.2e} lemma: {accepted} samples, "
                                 f"{failures} singular, min rcond={worst:.2e}")


@check("09_rk4_order")
def rk4_order(name):
    """Halving dt shrinks the 5 s end-state error (vs a dt/8 reference) by 12-20x."""
    entry = get_system("sleigh")
    h = 0.1

    def end_state(dt):
        traj = integrate(*entry.problem, entry.config.replace(dt=dt, t_final=5.0))
        return np.concatenate([traj.q[-1], traj.v[-1]])

    ref = end_state(h / 8)
    e1 = np.max(np.abs(end_state(h) - ref))
    e2 = np.max(np.abs(end_state(h / 2) - ref))
    factor = e1 / e2
    return CheckResult(name, 12.0 <= factor <= 20.0,
                       f"err(dt={h})={e1:.3e} err(dt={h / 2})={e2:.3e} factor={factor:.2f}")


@check("10_figure_shape")
def figure_shape(name):
    """Projection CSV and figures are written and finite; after 10 s the blade constraint holds to 1e-3."""
    entry = get_system("sleigh")
    traj = integrate(*entry.problem, entry.config)
    with tempfile.TemporaryDirectory() as tmp:
        write_csv(traj, Path(tmp) / "trajectory.csv")
        paths = render_figures(traj, tmp)
        data = np.loadtxt(paths["projection_csv"], delimiter=",", skiprows=1)
        files_ok = all(p.exists() and p.stat().st_size > 0 for p in paths.values())
    finite = bool(np.all(np.isfinite(data))) and data.shape == (len(traj), 3)
    th = traj.q[:, 2]
    residual = np.abs(traj.v[:, 0] * np.sin(th) - traj.v[:, 1] * np.cos(th))
    late = float(np.max(residual[traj.times > 10.0]))
    ok = files_ok and finite and late <= 1e-3
    return CheckResult(name, ok, f"files={files_ok} finite={finite} "
                                 f"max|xdot sin - ydot cos| after 10 s={late:.2e}")


def run_checks(pattern: str | None = None) -> list[CheckResult]:
    """Run the registered checks whose names contain ``pattern``, in name order."""
    names = sorted(n for n in CHECKS if pattern is None or pattern in n)
    return [CHECKS[n]() for n in names]
