import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian
from dwlab.grid.fields import Domain, ScalarField, SpacetimeField, SpinorField
from dwlab.grid.io import decode_snapshot, encode_snapshot, load_snapshot, save_snapshot
from dwlab.grid.norms import (
    boundary_mass,
    frequency_l2_norm,
    lebesgue_norm,
    mixed_norm,
    mixed_norm_from_frame_norms,
    trapezoid_weights,
)
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import fft_forward, fft_inverse, spectral_derivative


@pytest.mark.parametrize("m, half_period", [(15, 8.0), (6, 8.0), (16, 0.0), (16, -1.0)])
def test_grid_rejects_bad_sizes(m, half_period):
    with pytest.raises(ValueError):
        GridSpec(half_period=half_period, points_per_axis=m)


def test_grid_lattice(small_grid):
    assert small_grid.shape == (16, 16, 16)
    assert small_grid.lattice_indices.min() == -8
    assert small_grid.lattice_indices.max() == 7
    assert_allclose(small_grid.frequency_spacing, math.pi / 8.0)
    assert_allclose(small_grid.nyquist, math.pi)
    assert small_grid.lattice_norm_squared[0, 0, 0] == 0
    assert GridSpec.from_dict(small_grid.to_dict()) == small_grid


def test_gaussian_transform_matches_continuum(grid):
    f_hat = fft_forward(gaussian(grid))
    xi1, xi2, xi3 = grid.frequency_mesh()
    expected = (2.0 * math.pi) ** 1.5 * np.exp(-(xi1**2 + xi2**2 + xi3**2) / 2.0)
    assert f_hat.domain is Domain.FREQUENCY
    assert_allclose(f_hat.values, expected, atol=1e-6)


def test_plancherel_and_inverse(small_grid, rng):
    f = ScalarField(
        grid=small_grid,
        values=rng.standard_normal(small_grid.shape) + 1j * rng.standard_normal(small_grid.shape),
    )
    f_hat = fft_forward(f)
    assert_allclose(frequency_l2_norm(f_hat), f.l2_norm(), rtol=1e-12)
    assert_allclose(fft_inverse(f_hat).values, f.values, atol=1e-12)


def test_spectral_derivative_of_plane_wave(small_grid):
    k = 3 * small_grid.frequency_spacing
    x1, _, _ = small_grid.mesh()
    f = ScalarField(grid=small_grid, values=np.broadcast_to(np.sin(k * x1), small_grid.shape) + 0j)
    expected = np.broadcast_to(k * np.cos(k * x1), small_grid.shape)
    assert_allclose(spectral_derivative(f, 0).values, expected, atol=1e-10)
    assert_allclose(spectral_derivative(f, 1).values, 0.0, atol=1e-10)


def test_field_algebra_checks(small_grid, grid):
    f = ScalarField.zeros(small_grid)
    with pytest.raises(ValueError):
        f + ScalarField.zeros(grid)
    with pytest.raises(TypeError):
        f * np.ones(3)
    with pytest.raises(ValueError):
        ScalarField(grid=small_grid, values=np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        fft_inverse(f)


def test_lebesgue_norm_of_constant(small_grid):
    one = ScalarField(grid=small_grid, values=np.ones(small_grid.shape, dtype=complex))
    assert_allclose(lebesgue_norm(one, 2.0), math.sqrt(small_grid.volume))
    assert_allclose(lebesgue_norm(one, 4.0), small_grid.volume**0.25)
    assert lebesgue_norm(one, math.inf) == 1.0
    with pytest.raises(ValueError):
        lebesgue_norm(one, 0.5)


def test_spinor_norm_uses_pointwise_magnitude(small_grid):
    values = np.zeros((4,) + small_grid.shape, dtype=complex)
    values[0] = 3.0
    values[2] = 4.0j
    psi = SpinorField(grid=small_grid, values=values)
    assert lebesgue_norm(psi, math.inf) == pytest.approx(5.0)
    assert psi.l2_norm() == pytest.approx(5.0 * math.sqrt(small_grid.volume))


def test_mixed_norm_of_steady_path(small_grid):
    f = gaussian(small_grid)
    u = SpacetimeField.from_frames([f] * 5, 0.5)
    assert u.window == 2.0
    assert_allclose(mixed_norm(u, 2.0, 2.0), math.sqrt(2.0) * f.l2_norm())
    assert_allclose(mixed_norm(u, math.inf, 2.0), f.l2_norm())
    with pytest.raises(ValueError):
        mixed_norm(SpacetimeField.from_frames([f], 0.5), 2.0, 2.0)


def test_trapezoid_weights():
    assert_allclose(trapezoid_weights(4, 0.5), [0.25, 0.5, 0.5, 0.25])
    assert mixed_norm_from_frame_norms([0.0, 0.0], 1.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        trapezoid_weights(1, 1.0)


def test_boundary_mass_flags_undecayed_fields(small_grid):
    one = ScalarField(grid=small_grid, values=np.ones(small_grid.shape, dtype=complex))
    assert boundary_mass(gaussian(small_grid, width=0.7)) < 1e-8
    assert boundary_mass(one) > 0.1


def test_spacetime_field_sampling(small_grid):
    f = gaussian(small_grid)
    u = SpacetimeField.from_frames([f, f * 2.0, f * 3.0], 0.25)
    assert_allclose(u.times, [0.0, 0.25, 0.5])
    assert_allclose(u.frame_norms(), [f.l2_norm(), 2 * f.l2_norm(), 3 * f.l2_norm()])
    with pytest.raises(ValueError):
        u + SpacetimeField.from_frames([f, f], 0.25)
    with pytest.raises(ValueError):
        SpacetimeField.from_frames([f], 0.0)


def test_snapshot_file(tmp_path, small_grid, rng):
    values = rng.standard_normal((4,) + small_grid.shape) + 1j * rng.standard_normal((4,) + small_grid.shape)
    psi = SpinorField(grid=small_grid, values=values)
    path = save_snapshot(psi, tmp_path / "psi.dwl")
    loaded = load_snapshot(path)
    assert isinstance(loaded, SpinorField)
    assert loaded.grid == small_grid
    assert_allclose(loaded.values, values)
    assert not list(tmp_path.glob("*.tmp"))


def test_snapshot_rejects_corrupt_payloads(small_grid):
    payload = encode_snapshot(gaussian(small_grid))
    with pytest.raises(ValueError):
        decode_snapshot(b"XXXX" + payload[4:])
    with pytest.raises(ValueError):
        decode_snapshot(payload[:-16])
    with pytest.raises(ValueError):
        decode_snapshot(payload[:5])
