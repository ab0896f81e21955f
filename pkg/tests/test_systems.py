import numpy as np
import pytest

from vnc import geometry
from vnc.dynamics import RhsKind
from vnc.model import State
from vnc.simulation import fit_decay_rate, integrate
from vnc.systems import CATALOG, build_rolling_coin, build_sleigh, get_system


def test_catalog_names():
    assert set(CATALOG) == {"sleigh", "sleigh-nonorthogonal", "rolling-coin"}


def test_unknown_system():
    with pytest.raises(KeyError):
        get_system("unicycle")


@pytest.mark.parametrize("builder,kwargs", [
    (build_sleigh, {"m": 0.0}), (build_sleigh, {"I": -1.0}), (build_rolling_coin, {"J": 0.0})])
def test_nonpositive_parameters_rejected(builder, kwargs):
    with pytest.raises(ValueError):
        builder(**kwargs)


def test_sleigh_defaults(sleigh):
    cfg = sleigh.config
    assert (cfg.dt, cfg.t_final, cfg.n_steps) == (0.01, 50.0, 5000)
    assert np.array_equal(cfg.initial_state.q, [1.0, 1.0, np.pi])
    assert np.array_equal(cfg.initial_state.v, [0.5, 8.0, 0.1])
    assert cfg.rhs_kind == RhsKind.stabilizing(1.0)
    assert sleigh.params == {"m": 2.0, "I": 1.5}


def test_coin_defaults(coin):
    cfg = coin.config
    assert (cfg.dt, cfg.t_final, cfg.n_steps) == (0.01, 100.0, 10000)
    assert np.array_equal(cfg.initial_state.q, [1.0, 1.0, np.pi, np.pi / 2])
    assert np.array_equal(cfg.initial_state.v, [0.5, 8.0, 0.1, -0.1])


def test_sleigh_input_vector(sleigh, rng):
    th = rng.uniform(-3, 3)
    Y = sleigh.inputs.matrix(np.array([0.0, 0.0, th]))[:, 0]
    assert np.allclose(Y, [np.sin(th) / 2, -np.cos(th) / 2, 0.0], atol=1e-15)


def test_nonorthogonal_input_vector(sleigh_nonorthogonal):
    Y = sleigh_nonorthogonal.inputs.matrix(np.array([0.0, 0.0, 0.3]))[:, 0]
    assert np.allclose(Y, [np.sin(0.3) / 2, -np.cos(0.3) / 2, 1 / 1.5], atol=1e-15)


def test_coin_input_vectors(coin):
    phi = 0.8
    Y = coin.inputs.matrix(np.array([0.0, 0.0, 0.0, phi]))
    assert np.allclose(Y[:, 0], [0.5, 0.0, -np.cos(phi) / 1.5, 1 / 1.1], atol=1e-15)
    assert np.allclose(Y[:, 1], [0.0, 0.5, -np.sin(phi) / 1.5, 1 / 1.1], atol=1e-15)


def test_nonorthogonal_same_u_star_formula(sleigh, sleigh_nonorthogonal, rng):
    s = State(rng.normal(size=3), rng.normal(size=3))
    assert np.array_equal(sleigh.reference_laws["stabilizing"](s.q, s.v),
                          sleigh_nonorthogonal.reference_laws["stabilizing"](s.q, s.v))


def test_nonorthogonal_blade_residual_decays(sleigh_nonorthogonal):
    cfg = sleigh_nonorthogonal.config.replace(t_final=10.0)
    traj = integrate(*sleigh_nonorthogonal.problem, cfg)
    th = traj.q[:, 2]
    h = traj.v[:, 0] * np.sin(th) - traj.v[:, 1] * np.cos(th)
    rate = fit_decay_rate(traj.times, (0.0, 5.0), h).rates[0]
    assert rate == pytest.approx(1.0, rel=0.01)


def test_analytic_partials_match_fd(coin, rng):
    for form in coin.constraints.forms:
        q = rng.normal(size=4)
        fd = geometry.central_difference(form, q, 1e-5)
        assert np.allclose(form.jacobian(q), fd, atol=1e-9)


def test_custom_parameters_flow_through():
    entry = build_sleigh(m=3.0, I=0.5)
    assert np.allclose(entry.system.metric.matrix(np.zeros(3)), np.diag([3.0, 3.0, 0.5]))
