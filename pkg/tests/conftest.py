import numpy as np
import pytest
from hypothesis import settings

from scatstab import Grid, Signal

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid1():
    return Grid.regular(1, 256, 16.0)


@pytest.fixture
def grid2():
    return Grid.regular(2, 64, 8.0)


def random_signal(grid, rng, complex_=True, envelope=True):
    """White noise, optionally damped towards the window edges."""
    z = rng.standard_normal(grid.shape)
    if complex_:
        z = z + 1j * rng.standard_normal(grid.shape)
    if envelope:
        r2 = np.sum(grid.points() ** 2, axis=-1)
        z = z * np.exp(-r2 / (2 * (grid.lengths[0] / 8) ** 2))
    return Signal(grid, z)
