import numpy as np
import pytest

from fwsystem.dynamics import SimConfig, simulate
from fwsystem.spectral import Grid
from fwsystem.state import State


@pytest.fixture(scope="session")
def grid():
    return Grid(np.pi, 256)


@pytest.fixture(scope="session")
def smooth_state(grid):
    x = grid.x
    return State(grid, 0.1 * np.sin(x), 1.0 + 0.1 * np.cos(x))


@pytest.fixture(scope="session")
def smooth_cfg():
    return SimConfig(dt=1e-3, t_end=1.0, stride=10)


@pytest.fixture(scope="session")
def smooth_run(smooth_state, smooth_cfg):
    """The reference smooth run shared by several modules."""
    return simulate(smooth_state, smooth_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
