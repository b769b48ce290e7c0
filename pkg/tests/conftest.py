import numpy as np
import pytest

from hypcover import experiments as E


@pytest.fixture(scope="session")
def octagon():
    return E.octagon()


@pytest.fixture(scope="session")
def table(octagon):
    return octagon[2]


@pytest.fixture(scope="session")
def pairing(octagon):
    return octagon[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
