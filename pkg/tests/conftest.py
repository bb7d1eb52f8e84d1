import numpy as np
import pytest

from symcalc.harness.catalog import CORE_SCENARIOS, load_scenario
from symcalc.symbol_core import standard_points


@pytest.fixture(scope="session")
def points():
    return standard_points()


@pytest.fixture(scope="session")
def core_ops():
    return {name: load_scenario(name).operator() for name in CORE_SCENARIOS}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
