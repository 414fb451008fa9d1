import pytest

from nlse_locality.simulator.grid import Grid2D


@pytest.fixture(scope="session")
def small_grid():
    return Grid2D(64, 8.0)


@pytest.fixture(scope="session")
def mid_grid():
    return Grid2D(128, 8.0)
