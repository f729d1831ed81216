import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian
from dwlab.dirac.projector import apply_projector, build_projector
from dwlab.grid.fields import ScalarField, SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import fft_forward
from dwlab.nonlinear.null_forms import (
    NullFormKind,
    dealias_mask,
    dealiased_product,
    free_time_derivative,
    lattice_mode,
    null_form,
    null_symbol_probe,
    separated_pair,
)
from dwlab.nonlinear.potentials import (
    inverse_derivative,
    inverse_derivative_symbol,
    yukawa_convolve,
    yukawa_kernel,
    yukawa_symbol_by_quadrature,
)
from dwlab.nonlinear.rhs import dirac_rhs, hartree_term, spinor_density, spinor_pairing, wave_rhs
from dwlab.propagator.evolution import zero_mode_content


@pytest.fixture
def mode_grid() -> GridSpec:
    return GridSpec(half_period=math.pi, points_per_axis=16)


def test_parse_null_forms():
    assert NullFormKind.parse("Q12") == NullFormKind(1, 2)
    assert NullFormKind.parse("q0").is_q0
    assert str(NullFormKind.parse(" Q23 ")) == "Q23"
    for bad in ("Q21", "Q4", "Q11", "null"):
        with pytest.raises(ValueError):
            NullFormKind.parse(bad)


@pytest.mark.parametrize("kind", ["Q12", "Q13", "Q23"])
def test_qij_vanishes_on_the_diagonal(small_grid, kind):
    u = gaussian(small_grid, center=(0.5, 0.0, -0.5))
    assert null_form(u, u, kind).l2_norm() <= 1e-14 * u.l2_norm()


def test_q0_needs_time_derivatives(small_grid):
    u = gaussian(small_grid)
    with pytest.raises(ValueError):
        null_form(u, u, NullFormKind.q0())


def test_q0_vanishes_on_parallel_free_waves(mode_grid):
    u, v = lattice_mode(mode_grid, (1, 0, 0)), lattice_mode(mode_grid, (2, 0, 0))
    q = null_form(u, v, "Q0", free_time_derivative(u), free_time_derivative(v))
    assert q.l2_norm() <= 1e-12
    w = lattice_mode(mode_grid, (0, 2, 0))
    q = null_form(u, w, "Q0", free_time_derivative(u), free_time_derivative(w))
    assert_allclose(q.l2_norm(), 2.0 * u.l2_norm(), rtol=1e-12)


def test_dealiased_product(mode_grid):
    u = lattice_mode(mode_grid, (1, 0, 0))
    assert_allclose(dealiased_product(u, u).values, lattice_mode(mode_grid, (2, 0, 0)).values, atol=1e-12)
    high = lattice_mode(mode_grid, (4, 0, 0))
    assert dealiased_product(high, high).l2_norm() <= 1e-12
    spinor = SpinorField.from_components([u] * 4)
    assert isinstance(dealiased_product(u.conj(), spinor), SpinorField)


def test_inverse_derivative(small_grid):
    symbol = inverse_derivative_symbol(small_grid, 2.0)
    assert symbol[0, 0, 0] == 0.0
    f = gaussian(small_grid).apply_symbol(small_grid.frequency_norm > 0)
    lifted = f.apply_symbol(small_grid.frequency_norm**2)
    assert_allclose(inverse_derivative(lifted, 2.0).values, f.values, atol=1e-12)
    with pytest.raises(ValueError):
        inverse_derivative(f, -1.0)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
def test_yukawa_of_constant(small_grid, b):
    c = ScalarField(grid=small_grid, values=np.full(small_grid.shape, 3.0 + 1.0j))
    assert_allclose(yukawa_convolve(c, b).values, (3.0 + 1.0j) / b**2, rtol=1e-12)


@pytest.mark.parametrize("k", [0.0, 0.5, 3.0])
def test_yukawa_symbol_matches_the_kernel(k):
    assert_allclose(yukawa_symbol_by_quadrature(k, 1.5), 1.0 / (1.5**2 + k**2), rtol=1e-6)


def test_yukawa_range_is_checked():
    with pytest.raises(ValueError):
        yukawa_kernel(np.ones(3), 0.0)
    with pytest.raises(ValueError):
        yukawa_kernel(np.ones(3), math.inf)


def test_hartree_term_of_plane_waves(mode_grid):
    u = lattice_mode(mode_grid, (1, 0, 0))
    psi = SpinorField.from_components([u, u * 1j, u.conj(), u * 0.0])
    assert_allclose(spinor_density(psi).values, 3.0, atol=1e-12)
    assert_allclose(hartree_term(psi, 2.0).values, 0.75 * psi.values, atol=1e-12)


def test_wave_rhs(small_grid):
    u_plus = gaussian(small_grid, center=(1.0, 0.0, 0.0)) * (1.0 + 0.5j)
    u_minus = gaussian(small_grid, center=(0.0, -1.0, 0.5))
    f_plus, f_minus = wave_rhs(u_plus, u_minus, "Q12")
    assert f_plus.l2_norm() > 0
    assert_allclose(f_minus.values, -f_plus.values)
    half, _ = wave_rhs(u_plus, u_minus, "Q12", coupling=0.5)
    assert_allclose(half.values, 0.5 * f_plus.values, atol=1e-15)
    zero, _ = wave_rhs(u_plus, ScalarField.zeros(small_grid), "Q0")
    assert math.isfinite(zero.l2_norm())


def test_separated_pair():
    first, second = separated_pair(math.pi / 2)
    assert first == (4, 0, 0) and second == (0, 4, 0)
    first, second = separated_pair(0.25, (2, 3))
    assert first[0] == 0 and second[0] == 0
    with pytest.raises(ValueError):
        separated_pair(0.0)
    with pytest.raises(ValueError):
        separated_pair(0.25, ratio=0.0)


def test_null_symbol_gains_an_angle():
    report = null_symbol_probe(angles=(0.5, 0.25, 0.125), scales=(8.0, 8.0))
    for sample in report.samples:
        assert_allclose(sample.value, math.sin(sample.params["angle"]), rtol=1e-10)
    assert 0.9 <= report.fits["angle"].slope <= 1.05
    with pytest.raises(ValueError):
        null_symbol_probe(kind="Q0")


def test_null_symbol_gain_holds_for_unequal_frequencies():
    report = null_symbol_probe(angles=(0.5, 0.25, 0.125), scales=(8.0, 4.0), trials=2, seed=1)
    for sample in report.samples:
        # random amplitudes on antipodal modes never beat the plane-wave pair
        assert_allclose(sample.value, math.sin(sample.params["angle"]), rtol=1e-10)
        assert_allclose(sample.params["lambda_2"], 4.0, rtol=0.15)
    assert all(0.0 < spread <= 1.0 for spread in report.extras["trial_spread"])
    assert 0.9 <= report.fits["angle"].slope <= 1.05
    assert report.params["scales"] == [8.0, 4.0]
    with pytest.raises(ValueError):
        null_symbol_probe(scales=(8.0, 0.0))
    with pytest.raises(ValueError):
        null_symbol_probe(trials=-1)


@pytest.mark.parametrize("theta", [1, -1])
def test_dirac_rhs_is_the_projected_hartree_term(theta):
    grid = GridSpec(half_period=8.0, points_per_axis=16)
    g = gaussian(grid)
    psi = SpinorField.from_components([g, g * 0.5j, g.conj() * 0.0, g * 0.25])
    projector = build_projector(grid, 1.0, theta)
    rhs = dirac_rhs(psi, 1.0, projector)
    assert_allclose(rhs.values, apply_projector(hartree_term(psi, 1.0), projector).values, atol=1e-14)
    assert_allclose(apply_projector(rhs, projector).values, rhs.values, atol=1e-10)
    with pytest.raises(ValueError):
        dirac_rhs(psi, 1.0, build_projector(GridSpec(half_period=4.0, points_per_axis=16), 1.0, theta))


def spinor_bump(grid: GridSpec) -> SpinorField:
    g = gaussian(grid, width=1.5, center=(0.5, -0.5, 0.0))
    h = gaussian(grid, width=1.0, center=(-1.0, 0.0, 0.5))
    return SpinorField.from_components([g, h * 0.5j, g * (0.25 - 0.5j), h])


def test_density_of_a_localized_spinor_is_nonnegative(small_grid, rng):
    values = np.zeros((4,) + small_grid.shape, dtype=np.complex128)
    values[0, 8, 8, 8] = 1.0
    values[2, 3, 5, 7] = 0.5j
    point = SpinorField(grid=small_grid, values=values)
    noise = SpinorField(
        grid=small_grid, values=rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    )
    mask = dealias_mask(small_grid)
    for psi in (point, noise):
        rho = spinor_density(psi)
        assert np.all(rho.values.imag == 0.0)
        assert rho.values.real.min() >= -1e-14
        # the retained band agrees with the truncated product
        reference = fft_forward(spinor_pairing(psi, psi)).values * mask
        assert_allclose(fft_forward(rho).values * mask, reference, atol=1e-12 * np.abs(reference).max())


def test_dirac_rhs_is_cubic(small_grid):
    psi = spinor_bump(small_grid)
    projector = build_projector(small_grid, 1.0, 1)
    once = dirac_rhs(psi, 1.0, projector)
    assert once.l2_norm() > 0
    assert_allclose(dirac_rhs(psi * 2.0, 1.0, projector).values, 8.0 * once.values, rtol=1e-12, atol=1e-14)
    assert dirac_rhs(psi * 0.0, 1.0, projector).l2_norm() == 0.0


@pytest.mark.parametrize("kind", ["Q12", "Q0"])
def test_wave_rhs_is_quadratic(small_grid, kind):
    u_plus = gaussian(small_grid, center=(1.0, 0.0, 0.0)) * (1.0 + 0.5j)
    u_minus = gaussian(small_grid, center=(0.0, -1.0, 0.5))
    f_plus, f_minus = wave_rhs(u_plus, u_minus, kind)
    g_plus, g_minus = wave_rhs(u_plus * 3.0, u_minus * 3.0, kind)
    assert f_plus.l2_norm() > 0
    atol = 1e-13 * np.abs(f_plus.values).max()
    assert_allclose(g_plus.values, 9.0 * f_plus.values, rtol=1e-12, atol=atol)
    assert_allclose(g_minus.values, 9.0 * f_minus.values, rtol=1e-12, atol=atol)


@pytest.mark.parametrize("kind", ["Q12", "Q13", "Q23"])
def test_wave_rhs_vanishes_on_real_radial_data(small_grid, kind):
    u = gaussian(small_grid)
    scale = null_form(u, gaussian(small_grid, center=(1.0, 0.0, 0.0)), kind).l2_norm()
    for forcing in wave_rhs(u, ScalarField.zeros(small_grid), kind):
        assert forcing.l2_norm() <= 1e-14 * scale


def test_null_form_is_bilinear(small_grid):
    u1 = gaussian(small_grid, center=(1.0, 0.0, 0.0))
    u2 = gaussian(small_grid, width=1.5, center=(0.0, 0.5, -1.0)) * 1j
    v = gaussian(small_grid, center=(-0.5, 1.0, 0.0))
    a, b = 2.0 - 1.0j, 0.5
    scale = null_form(u1, v, "Q12").l2_norm()
    left = null_form(u1 * a + u2 * b, v, "Q12")
    assert_allclose(
        left.values, (null_form(u1, v, "Q12") * a + null_form(u2, v, "Q12") * b).values, atol=1e-12 * scale
    )
    right = null_form(v, u1 * a + u2 * b, "Q12")
    assert_allclose(
        right.values, (null_form(v, u1, "Q12") * a + null_form(v, u2, "Q12") * b).values, atol=1e-12 * scale
    )


@pytest.mark.parametrize("kind", ["Q12", "Q13", "Q23"])
def test_null_form_is_antisymmetric(small_grid, kind):
    u = gaussian(small_grid, center=(1.0, 0.0, 0.0)) * (1.0 + 2.0j)
    v = gaussian(small_grid, width=1.5, center=(0.0, -1.0, 0.5))
    forward = null_form(u, v, kind)
    assert forward.l2_norm() > 0
    assert_allclose(forward.values, (-null_form(v, u, kind)).values, rtol=0, atol=1e-14 * np.abs(forward.values).max())


def test_yukawa_is_self_adjoint_and_keeps_positivity(small_grid, rng):
    f, g = (
        ScalarField(grid=small_grid, values=rng.standard_normal(small_grid.shape) + 1j * rng.standard_normal(small_grid.shape))
        for _ in range(2)
    )
    lhs = np.vdot(yukawa_convolve(f, 0.7).values, g.values)
    rhs = np.vdot(f.values, yukawa_convolve(g, 0.7).values)
    assert_allclose(lhs, rhs, rtol=1e-12)
    density = gaussian(small_grid, width=2.0)
    potential = yukawa_convolve(density, 0.5)
    assert potential.values.real.min() >= -1e-10
    assert np.abs(potential.values.imag).max() <= 1e-12


def test_inverse_derivative_composes(small_grid):
    f = gaussian(small_grid, center=(0.5, 0.0, -0.5))
    assert zero_mode_content(f) > 0.0
    twice = inverse_derivative(inverse_derivative(f, 1.0, warn=False), 1.0, warn=False)
    once = inverse_derivative(f, 2.0, warn=False)
    assert_allclose(twice.values, once.values, atol=1e-12 * np.abs(once.values).max())
    assert zero_mode_content(once) <= 1e-12 * zero_mode_content(f)
