"""Acceptance criteria, one test per check at its pinned tolerance.

Each check prints one PASS/FAIL line; the lines are repeated in an
"acceptance criteria" section at the end of the pytest report.
"""
import pytest

from vnc.checks import CHECKS

RESULTS = []


@pytest.mark.parametrize("name", sorted(CHECKS))
def test_acceptance(name):
    result = CHECKS[name]()
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.detail
