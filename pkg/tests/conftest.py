import numpy as np
import pytest

from dwlab.grid.fields import ScalarField
from dwlab.grid.spec import GridSpec

# Probe tests run on boxes far below the acceptance sizes (M = 64 / 48); the
# shapes of the estimates are checked, not their desk-scale constants.


@pytest.fixture
def small_grid() -> GridSpec:
    return GridSpec(half_period=8.0, points_per_axis=16)


@pytest.fixture
def grid() -> GridSpec:
    return GridSpec(half_period=16.0, points_per_axis=32)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def gaussian(grid: GridSpec, width: float = 1.0, center=(0.0, 0.0, 0.0)) -> ScalarField:
    x1, x2, x3 = grid.mesh()
    r2 = (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2 + (x3 - center[2]) ** 2
    return ScalarField(grid=grid, values=np.exp(-r2 / (2.0 * width**2)) + 0j)


@pytest.fixture
def bump_field(grid) -> ScalarField:
    return gaussian(grid)
