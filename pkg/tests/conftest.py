import numpy as np
import pytest

from qcsim.state import RegisterLayout, StateVector

ACCEPTANCE_LOG: list[str] = []


def random_state(layout, rng):
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(v / np.linalg.norm(v), layout)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
