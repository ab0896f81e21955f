from importlib import resources

import numpy as np
import pytest

from vnc.errors import ConfigError
from vnc.simulation import integrate
from vnc.sysfile import load_system


def data_path(name):
    return resources.files("vnc") / "data" / name


BASE = """format_version: 1
coordinates: [x, y, theta]
parameters: {m: 2.0, I: 1.5}
metric:
  diagonal: [m, m, I]
constraints:
  - [sin(theta), -cos(theta), 0]
inputs:
  - [sin(theta), -cos(theta), 0]
"""


def test_file_sleigh_matches_builtin(sleigh, sleigh_run):
    definition = load_system(data_path("sleigh.yaml"))
    traj = integrate(*definition.problem, definition.config)
    assert definition.system.metric.constant
    for field in ("times", "q", "v", "controls", "mu_hats", "energies"):
        assert np.max(np.abs(getattr(traj, field) - getattr(sleigh_run, field))) <= 1e-12


def test_file_coin_matches_builtin(coin):
    definition = load_system(data_path("rolling_coin.yaml"))
    cfg = coin.config.replace(t_final=5.0)
    a = integrate(*definition.problem, cfg)
    b = integrate(*coin.problem, cfg)
    assert np.max(np.abs(a.q - b.q)) <= 1e-12
    assert np.max(np.abs(a.v - b.v)) <= 1e-12
    assert definition.config.t_final == 100.0


def test_defaults_when_missing():
    d = load_system(BASE, is_text=True)
    assert d.name == "custom"
    assert (d.config.dt, d.config.t_final) == (0.01, 10.0)
    assert d.system.dim == 3 and d.constraints.m == 1


def test_matrix_and_entries_metric_forms(rng):
    matrix = BASE.replace("  diagonal: [m, m, I]",
                          "  matrix: [[1 + x^2, 0.1, 0], [0.1, 2, 0], [0, 0, 1]]")
    entries = BASE.replace("  diagonal: [m, m, I]",
                           "  entries: {x x: 1 + x^2, x y: 0.1, y y: 2, theta theta: 1}")
    a = load_system(matrix, is_text=True).system.metric
    b = load_system(entries, is_text=True).system.metric
    q = rng.normal(size=3)
    assert np.array_equal(a.matrix(q), b.matrix(q))
    assert not a.constant
    dG = a.derivatives(q)
    assert dG[0, 0, 0] == pytest.approx(2 * q[0])
    assert np.count_nonzero(dG) == 1


def test_potential_and_force():
    text = BASE + "potential: m * 9.81 * y\nexternal_force: [-0.5 * dx, -0.5 * dy, 0]\n"
    d = load_system(text, is_text=True)
    q, v = np.zeros(3), np.array([1.0, 2.0, 0.0])
    assert np.allclose(d.system.grad_potential(q), [0.0, 9.81, 0.0])
    assert np.allclose(d.system.force_vector(q, v), [-0.25, -0.5, 0.0])


def _error(text):
    with pytest.raises(ConfigError) as info:
        load_system(text, is_text=True)
    return info.value


def test_unknown_symbol_position():
    err = _error(BASE.replace("[sin(theta), -cos(theta), 0]\ninputs",
                              "[sin(theta), -cos(phi), 0]\ninputs"))
    assert err.line == 7
    assert err.column is not None and "phi" in str(err)
    assert str(err).startswith("line 7, column")


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("format_version: 2\n", "format_version"),
    ("coordinates: [x]\n", "format_version"),
    (BASE + "bogus: 1\n", "unknown key"),
    (BASE.replace("[m, m, I]", "[m, m]"), "expected 3"),
    (BASE.replace("inputs:\n  - [sin(theta), -cos(theta), 0]\n", "inputs: []\n"), "must match"),
    (BASE.replace("[x, y, theta]", "[x, x, theta]"), "duplicate"),
    (BASE.replace("[x, y, theta]", "[x, y, sin]"), "invalid coordinate"),
    (BASE + "defaults: {dt: 0}\n", "dt"),
    (BASE + "defaults: {speed: 1}\n", "unknown defaults"),
    ("format_version: 1\ncoordinates: [x\n", "YAML"),
])
def test_config_errors(text, fragment):
    err = _error(text)
    assert fragment in str(err)


def test_parameters_may_reference_earlier_ones():
    d = load_system(BASE.replace("{m: 2.0, I: 1.5}", "{m: 2.0, I: m * 0.75}"), is_text=True)
    assert np.allclose(d.system.metric.matrix(np.zeros(3)), np.diag([2.0, 2.0, 1.5]))
