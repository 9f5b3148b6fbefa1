import sys

import pytest

from deltakick import floquet
from deltakick.params import make_params


@pytest.fixture(scope="session")
def fig1():
    return make_params(1, 80, 1, 2, k=5)


@pytest.fixture(scope="session")
def fig1_block(fig1):
    return floquet.build_block(fig1, 0.0)


@pytest.fixture(scope="session")
def fig1_states(fig1_block):
    return floquet.diagonalize(fig1_block)


@pytest.fixture(scope="session")
def small():
    """A cheap resonance with nonzero l and gravity, P = 2*9*3 = 54."""
    return make_params(3, 2, 1, 3, l=1, k=1.3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
