import numpy as np
import pytest

from vnc.systems import get_system


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sleigh():
    return get_system("sleigh")


@pytest.fixture(scope="session")
def sleigh_nonorthogonal():
    return get_system("sleigh-nonorthogonal")


@pytest.fixture(scope="session")
def coin():
    return get_system("rolling-coin")


@pytest.fixture(scope="session")
def sleigh_run(sleigh):
    from vnc.simulation import integrate
    return integrate(*sleigh.problem, sleigh.config)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for result in sorted(results, key=lambda r: r.name):
        terminalreporter.write_line(result.line())
