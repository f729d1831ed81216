import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dwlab.grid.fields import ScalarField, SpacetimeField
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, DyadicScale, dyadic_range, smooth_step
from dwlab.multiplier.caps import CapCollection, project_cap
from dwlab.multiplier.cubes import CubeCollection, project_cube
from dwlab.multiplier.littlewood_paley import (
    annulus_symbol,
    littlewood_paley_sum,
    project_annulus,
    resolved_scales,
)
from dwlab.multiplier.modulation import (
    modulation_symbol,
    project_modulation,
    taper_leakage,
    temporal_taper,
)
from dwlab.multiplier.probes import bernstein_probe
from dwlab.propagator.dispersion import WAVE


def plane_wave(grid: GridSpec, n) -> ScalarField:
    x1, x2, x3 = grid.mesh()
    k = grid.frequency_spacing
    return ScalarField(
        grid=grid,
        values=np.broadcast_to(np.exp(1j * k * (n[0] * x1 + n[1] * x2 + n[2] * x3)), grid.shape),
    )


@pytest.fixture
def unit_grid() -> GridSpec:
    # frequency spacing pi / L = 1
    return GridSpec(half_period=math.pi, points_per_axis=16)


def test_smooth_step_symmetry():
    x = np.linspace(-0.5, 1.5, 41)
    assert_allclose(smooth_step(x) + smooth_step(1.0 - x), 1.0, atol=1e-15)


def test_dyadic_partition_of_unity():
    r = np.geomspace(1e-2, 1e2, 200)
    assert_allclose(DEFAULT_BUMP.dyadic_sum(r, -10, 10), 1.0, atol=1e-10)
    assert DEFAULT_BUMP.rho_low(0.0) == 1.0
    assert DEFAULT_BUMP.rho(0.5) == 0.0 and DEFAULT_BUMP.rho(2.0) == 0.0


def test_dyadic_scales():
    assert DyadicScale.of(8).exponent == 3
    assert DyadicScale.of(0.25).value == 0.25
    assert [s.value for s in dyadic_range(0.3, 4.0)] == [0.5, 1.0, 2.0, 4.0]
    with pytest.raises(ValueError):
        DyadicScale.of(3.0)
    with pytest.raises(ValueError):
        DyadicScale.of(-2.0)


def test_annulus_on_single_modes(unit_grid):
    f = plane_wave(unit_grid, (0, 0, 2))
    assert_allclose(project_annulus(f, 2.0).values, DEFAULT_BUMP.rho(1.0) * f.values, atol=1e-12)
    # |xi| = 8 lambda is outside 1/2 < r < 2
    far = plane_wave(GridSpec(half_period=math.pi, points_per_axis=32), (0, 0, 8))
    assert_allclose(project_annulus(far, 1.0, inhomogeneous=False).values, 0.0, atol=1e-12)


def test_littlewood_paley_sum_recovers_resolved_band(rng):
    grid = GridSpec(half_period=4.0, points_per_axis=32)
    f = ScalarField(grid=grid, values=rng.standard_normal(grid.shape) + 0j)
    total = littlewood_paley_sum(f, resolved_scales(grid))
    norm = grid.frequency_norm
    band = (norm >= 2.0) & (norm <= grid.points_per_axis * math.pi / (4.0 * grid.half_period))
    scale = np.abs(f.spectrum()).max()
    assert_allclose(total.spectrum()[band], f.spectrum()[band], atol=1e-8 * scale)


def test_inhomogeneous_piece_owns_zero_frequency(unit_grid):
    assert annulus_symbol(unit_grid, 1.0)[0, 0, 0] == 1.0
    assert annulus_symbol(unit_grid, 1.0, inhomogeneous=False)[0, 0, 0] == 0.0


def test_cube_partition(small_grid, rng):
    cubes = CubeCollection(small_grid, 8.0)
    assert_allclose(cubes.weight_sum(), 1.0, atol=1e-10)
    assert cubes.overlap_count().max() <= 8
    f = ScalarField(grid=small_grid, values=rng.standard_normal(small_grid.shape) + 0j)
    total = sum((project_cube(f, c, cubes) for c in cubes), ScalarField.zeros(small_grid))
    assert_allclose(total.values, f.values, atol=1e-10)


def test_cube_selects_modes(unit_grid):
    cubes = CubeCollection(unit_grid, 8.0)
    # spacing mu / (2 c0) = 1, so lattice index n sits at a cube centre
    assert cubes.spacing == 1.0
    cube = next(c for c in cubes if c.index == (0, 0, 3))
    # c0 fixes the side; the diagonal is sqrt(3) longer
    assert cube.side == 8.0 / 4.0
    assert_allclose(cube.diameter, math.sqrt(3.0) * 2.0)
    inside = plane_wave(unit_grid, (0, 0, 3))
    assert np.abs(project_cube(inside, cube, cubes).values).min() >= 1.0 - 1e-6
    # two cube sides away
    away = plane_wave(unit_grid, (0, 0, -1))
    assert_allclose(project_cube(away, cube, cubes).values, 0.0, atol=1e-12)


def test_cap_partition_and_overlap(small_grid):
    caps = CapCollection(0.5)
    total = sum(caps.weight(c, small_grid) for c in caps)
    nonzero = small_grid.frequency_norm > 0
    assert_allclose(total[nonzero], 1.0, atol=1e-10)
    assert total[0, 0, 0] == 0.0
    assert caps.overlap_count(small_grid).max() <= 12
    with pytest.raises(ValueError):
        CapCollection(1.5)


def test_caps_commute_with_annuli(small_grid, rng):
    f = ScalarField(grid=small_grid, values=rng.standard_normal(small_grid.shape) + 0j)
    caps = CapCollection(1.0)
    cap = caps.nearest(np.array([0.0, 0.0, 1.0]))
    first = project_cap(project_annulus(f, 2.0), cap, caps)
    second = project_annulus(project_cap(f, cap, caps), 2.0)
    assert_allclose(first.values, second.values, atol=1e-12)


def test_cap_passes_mode_at_its_centre(unit_grid):
    caps = CapCollection(1.0)
    cap = caps.nearest(np.array([0.0, 0.0, 1.0]))
    f = plane_wave(unit_grid, (0, 0, 3))
    expected = caps.weight(cap, unit_grid)[0, 0, 3]
    assert_allclose(project_cap(f, cap, caps).values, expected * f.values, atol=1e-12)
    assert_allclose(expected, caps.direction_weight(cap, np.array([0.0, 0.0, 1.0])))


def test_modulation_symbol_of_modulated_mode():
    # tau spacing 2 pi / (K dt) = 1 and |xi_0| = 1
    grid = GridSpec(half_period=math.pi, points_per_axis=8)
    sample_count, time_step = 64, 2.0 * math.pi / 64
    tau_index, xi_index = sample_count - 1, (1, 0, 0)  # tau_0 = -1
    for d in (0.5, 1.0, 4.0):
        passed = modulation_symbol(grid, sample_count, time_step, d, 1, WAVE, cumulative=True)
        assert passed[(tau_index, *xi_index)] == 1.0
    opposite = modulation_symbol(grid, sample_count, time_step, 2.0, -1, WAVE)
    assert_allclose(opposite[(tau_index, *xi_index)], DEFAULT_BUMP.rho(1.0))


def test_free_wave_has_only_window_leakage():
    grid = GridSpec(half_period=math.pi, points_per_axis=8)
    sample_count, time_step = 256, 0.2
    window = sample_count * time_step
    d = 64.0 * 2.0 * math.pi / window
    mode = plane_wave(grid, (1, 0, 0)).values
    times = time_step * np.arange(sample_count)
    u = SpacetimeField(grid=grid, time_step=time_step, frames=np.exp(-1j * times)[:, None, None, None] * mode)
    projected, leakage = project_modulation(u, d, 1)
    assert leakage <= 1e-3
    assert np.linalg.norm(projected.frames) <= 10.0 * math.sqrt(leakage) * np.linalg.norm(u.frames) + 1e-12
    assert leakage == pytest.approx(taper_leakage(sample_count, time_step, d))


def test_modulation_rejects_short_windows(small_grid):
    u = SpacetimeField.from_frames([ScalarField.zeros(small_grid)] * 8, 0.1)
    with pytest.raises(ValueError):
        project_modulation(u, 1.0, 1)


def test_temporal_taper_vanishes_at_ends():
    window = temporal_taper(101)
    assert window[0] == 0.0 and window[-1] == 0.0
    assert_allclose(window[20:81], 1.0)


def test_bernstein_single_mode(unit_grid):
    f = plane_wave(unit_grid, (0, 0, 4))
    report = bernstein_probe(unit_grid, 4.0, 1.0, 2.0, fields=[f])
    caps = CapCollection(1.0)
    weight = caps.weight(caps.nearest(np.array([0.0, 0.0, 1.0])), unit_grid)[0, 0, 4]
    expected = weight * DEFAULT_BUMP.rho(1.0) * (2.0 * unit_grid.half_period) ** -1.5
    assert_allclose(report.samples[0].value, expected, rtol=1e-10)
    assert math.isfinite(report.extras["normalized"])


def test_bernstein_zero_input_is_skipped(unit_grid):
    report = bernstein_probe(unit_grid, 4.0, 1.0, fields=[ScalarField.zeros(unit_grid)])
    assert report.skipped == 1
    assert report.samples[0].value == 0.0
