import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian
from dwlab.grid.fields import ScalarField
from dwlab.normbench.probes import one_jump_path
from dwlab.normbench.variation import (
    distance_matrix,
    sup_norm,
    twisted_path,
    v2_norm,
    variation,
    variation_brute_force,
)
from dwlab.propagator.dispersion import WAVE
from dwlab.propagator.evolution import evolve_path


def test_constant_path():
    result = variation([2.0 - 1.0j] * 5)
    assert result.variation == 0.0
    assert_allclose(result.total, abs(2.0 - 1.0j))


def test_skipping_a_sample_can_win():
    result = variation([0.0, 1.0, 2.0])
    assert_allclose(result.variation, 2.0)
    assert result.points == [0, 2]
    assert_allclose(v2_norm([0.0, 1.0, 2.0]), 4.0)


def test_full_partition_can_win():
    result = variation([0.0, 1.0, 0.0])
    assert_allclose(result.variation, math.sqrt(2.0))
    assert result.points == [0, 1, 2]


@pytest.mark.parametrize("seed", range(4))
def test_dynamic_program_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    path = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    assert_allclose(variation(path).variation, variation_brute_force(path), rtol=1e-12)


def test_field_paths(small_grid, rng):
    frames = [
        ScalarField(grid=small_grid, values=rng.standard_normal(small_grid.shape) + 0j) for _ in range(6)
    ]
    distances = distance_matrix(frames)
    assert_allclose(distances, distances.T)
    assert_allclose(distances[0, 1], (frames[1] - frames[0]).l2_norm())
    assert_allclose(sup_norm(frames), max(f.l2_norm() for f in frames))
    assert_allclose(variation(frames).variation, variation_brute_force(frames), rtol=1e-12)


def test_limits():
    with pytest.raises(ValueError):
        variation([])
    with pytest.raises(ValueError):
        variation_brute_force(np.arange(17.0))


@pytest.mark.parametrize("theta", [1, -1])
def test_free_wave_twists_to_a_constant(small_grid, theta):
    f = gaussian(small_grid)
    path = evolve_path(f, WAVE, theta, 0.25 * np.arange(9))
    twisted = twisted_path(path, WAVE, theta)
    assert_allclose(twisted.frames, np.broadcast_to(f.values, twisted.frames.shape), atol=1e-12)
    assert_allclose(v2_norm(twisted), f.l2_norm(), rtol=1e-10)


def test_one_jump_path(small_grid):
    f = gaussian(small_grid)
    g = gaussian(small_grid, width=1.5, center=(1.0, 0.0, 0.0))
    times = 0.25 * np.arange(10)
    twisted = twisted_path(one_jump_path(f, g, times), WAVE, 1)
    expected = max(f.l2_norm(), g.l2_norm()) + (g - f).l2_norm()
    assert_allclose(v2_norm(twisted), expected, rtol=1e-10)
