import numpy as np
import pytest

from rainbow_acq.geometry import SystemConfig

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
