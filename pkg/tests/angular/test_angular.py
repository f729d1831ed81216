import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian
from dwlab.angular.concentration import concentration_probe
from dwlab.multiplier.caps import CapCollection
from dwlab.angular.harmonics import (
    SphericalHarmonicBasis,
    coefficient_count,
    flat_index,
    real_harmonic,
    to_spherical,
)
from dwlab.angular.projections import (
    angular_scales,
    angular_sobolev_norm,
    apply_omega_weight,
    hn_support,
    project_HN,
)
from dwlab.angular.rotations import angular_momentum_norm, rotation_apply
from dwlab.angular.shells import shell_analysis
from dwlab.angular.spectrum import AngularSpectrum
from dwlab.angular.synthesis import concentration_witness, random_localized_spectrum, synthesize
from dwlab.grid.fields import ScalarField
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import fft_forward


@pytest.fixture
def fine_grid() -> GridSpec:
    # spacing 1/2 resolves a unit gaussian and its derivatives to round-off
    return GridSpec(half_period=8.0, points_per_axis=32)


@pytest.fixture
def analysis(fine_grid):
    return shell_analysis(fine_grid, 8)


def dipole(grid: GridSpec, axis: int = 0) -> ScalarField:
    """``x_axis exp(-|x|^2 / 2)``, pure degree one about the origin."""
    g = gaussian(grid)
    return g.with_values(grid.mesh()[axis] * g.values)


def test_index_layout():
    assert coefficient_count(3) == 16
    assert flat_index(0, 0) == 0
    assert flat_index(2, 4) == 8
    with pytest.raises(ValueError):
        real_harmonic(2, 5, np.zeros(1), np.zeros(1))


def test_constant_harmonic():
    polar, azimuth = to_spherical(np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    assert_allclose(real_harmonic(0, 0, polar, azimuth), 1.0 / math.sqrt(4.0 * math.pi))


def test_harmonics_are_orthonormal_eigenfunctions():
    basis = SphericalHarmonicBasis(12)
    assert basis.orthonormality_defect() <= 1e-12
    assert basis.laplacian_residual() <= 1e-8
    with pytest.raises(ValueError):
        SphericalHarmonicBasis(33)


def test_analyze_recovers_coefficients():
    basis = SphericalHarmonicBasis(6)
    coefficients = np.random.default_rng(7).standard_normal(basis.size)
    polar, azimuth, _ = basis.nodes
    assert_allclose(basis.analyze(basis.evaluate(coefficients, polar, azimuth)), coefficients, atol=1e-12)


def test_hn_partition_of_unity(fine_grid, analysis):
    f = gaussian(fine_grid, center=(0.5, -0.3, 0.2))
    total = sum(
        (project_HN(f, N, analysis) for N in angular_scales(analysis.max_degree)),
        ScalarField.zeros(fine_grid),
    )
    assert_allclose(total.values, f.values, atol=1e-10)


def test_hn_pieces_with_disjoint_degrees_annihilate(fine_grid, analysis):
    f = gaussian(fine_grid, center=(0.5, -0.3, 0.2))
    assert hn_support(1, 8) == [0, 1]
    twice = project_HN(project_HN(f, 1, analysis), 8, analysis)
    assert twice.l2_norm() <= 1e-12 * f.l2_norm()


def test_hn_on_radial_and_dipole_data(fine_grid, analysis):
    radial = gaussian(fine_grid)
    assert_allclose(project_HN(radial, 1, analysis).values, radial.values, atol=1e-10)
    assert project_HN(radial, 2, analysis).l2_norm() <= 1e-10

    f = dipole(fine_grid)
    assert_allclose(project_HN(f, 1, analysis).values, f.values, atol=1e-7)
    assert project_HN(f, 2, analysis).l2_norm() <= 1e-7 * f.l2_norm()


def test_dipole_energy_sits_in_degree_one(fine_grid, analysis):
    energy = analysis.degree_energy(fft_forward(dipole(fine_grid)).values)
    assert energy[1] >= (1.0 - 1e-10) * sum(energy.values())


def test_omega_weight(fine_grid, analysis):
    radial = gaussian(fine_grid)
    assert_allclose(apply_omega_weight(radial, 1.0, analysis).values, radial.values, atol=1e-10)
    f = dipole(fine_grid)
    assert_allclose(apply_omega_weight(f, 2.0, analysis).values, 3.0 * f.values, atol=1e-6)
    assert apply_omega_weight(f, 0.0) is not f


def test_rotations(fine_grid):
    f = dipole(fine_grid, 0)
    expected = -dipole(fine_grid, 1)
    assert_allclose(rotation_apply(f, 1, 2).values, expected.values, atol=1e-8)
    assert_allclose(rotation_apply(f, 2, 2).values, 0.0)
    with pytest.raises(ValueError):
        rotation_apply(f, 0, 2)


def test_angular_momentum_norm(fine_grid):
    assert angular_momentum_norm(gaussian(fine_grid)) <= 1e-12
    f = dipole(fine_grid)
    assert_allclose(angular_momentum_norm(f), 2.0 * f.l2_norm() ** 2, rtol=1e-8)


def test_synthesize_radial_term(small_grid):
    spectrum = AngularSpectrum().add(0, 0, 1.0, "gaussian", width=1.0)
    expected = gaussian(small_grid).values / math.sqrt(4.0 * math.pi)
    assert_allclose(synthesize(spectrum, small_grid).values, expected, atol=1e-14)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        AngularSpectrum(max_degree=2).add(3, 0, 1.0)
    with pytest.raises(ValueError):
        AngularSpectrum.from_list([{"l": 1, "n": 0, "radial_profile_id": "ring"}]).terms[0].profile()
    spectrum = AngularSpectrum.from_list([{"l": 2, "n": 1, "coeff_re": 0.5, "coeff_im": -1.0}])
    assert spectrum.terms[0].coefficient == 0.5 - 1.0j
    assert spectrum.degree_norms_squared()[2] == pytest.approx(1.25)


def test_localized_spectra_respect_hn_support(rng):
    spectrum = random_localized_spectrum(2.0, 4.0, rng, max_degree=8)
    assert set(spectrum.degrees) <= set(hn_support(4.0, 8))
    witness = concentration_witness(2.0, 4.0, max_degree=8)
    assert all(term.n == term.degree for term in witness)


def test_concentration_probe(small_grid):
    report = concentration_probe(small_grid, 1.0, 1.0, alpha=0.5, trials=1, max_degree=8, max_caps=8)
    sample = report.samples[0]
    assert sample.params["alpha_n"] == 0.5
    assert math.isfinite(sample.value) and sample.value > 0
    assert_allclose(sample.value, report.extras["ratio"] / 0.5**0.25)
    with pytest.raises(ValueError):
        concentration_probe(small_grid, 1.0, 1.0, alpha=0.5, p=4.0, s=0.5)


def test_concentration_scans_every_cap_unless_limited(small_grid):
    full = concentration_probe(small_grid, 1.0, 1.0, alpha=0.5, trials=0, max_degree=8)
    limited = concentration_probe(small_grid, 1.0, 1.0, alpha=0.5, trials=0, max_degree=8, max_caps=8)
    everything = concentration_probe(
        small_grid, 1.0, 1.0, alpha=0.5, trials=0, max_degree=8, max_caps=len(CapCollection(0.5))
    )
    assert full.extras["max_caps"] is None and limited.extras["max_caps"] == 8
    assert full.samples[0].value >= limited.samples[0].value * (1.0 - 1e-12)
    assert_allclose(everything.samples[0].value, full.samples[0].value, rtol=1e-12)
    assert any(w.startswith("Cap scan limited") for w in limited.warnings)
    for report in (full, everything):
        assert not any(w.startswith("Cap scan limited") for w in report.warnings)


def test_angular_sobolev_norm(fine_grid, analysis):
    radial = gaussian(fine_grid)
    assert angular_sobolev_norm(radial * 0.0, analysis=analysis) == 0.0
    base = angular_sobolev_norm(radial, analysis=analysis)
    assert 0.0 < base <= radial.l2_norm() * (1.0 + 1e-12)
    assert_allclose(angular_sobolev_norm(radial * 2.0, analysis=analysis), 2.0 * base, rtol=1e-12)
    # degrees 0 and 1 sit in H_1 only
    for f in (radial, dipole(fine_grid)):
        assert_allclose(
            angular_sobolev_norm(f, sigma=3.0, analysis=analysis),
            angular_sobolev_norm(f, sigma=0.0, analysis=analysis),
            rtol=1e-8,
        )
