import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dwlab.angular.projections import project_HN
from dwlab.angular.shells import shell_analysis
from dwlab.common.utils import NumericalError
from dwlab.dirac.gamma import GAMMA, IDENTITY_4, SIGMA_1, gamma_products
from dwlab.dirac.orthogonality import default_scale, dirac_orthogonality_check
from dwlab.dirac.projector import (
    DiracProjector,
    apply_projector,
    build_projector,
    japanese_bracket,
    projector_defects,
)
from dwlab.grid.fields import SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.littlewood_paley import project_annulus


@pytest.fixture
def unit_grid() -> GridSpec:
    return GridSpec(half_period=math.pi, points_per_axis=8)


def random_spinor(grid: GridSpec, rng) -> SpinorField:
    shape = (4,) + grid.shape
    return SpinorField(grid=grid, values=rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_gamma_algebra():
    assert GAMMA.anticommutation_defect() == 0.0
    for alpha in gamma_products():
        assert_allclose(alpha, alpha.conj().T)
        assert_allclose(alpha @ alpha, IDENTITY_4)


def test_projector_at_zero_frequency(unit_grid):
    assert_allclose(build_projector(unit_grid, 1.0, 1).at((0, 0, 0)), np.diag([1, 1, 0, 0]), atol=1e-15)
    assert_allclose(build_projector(unit_grid, 1.0, -1).at((0, 0, 0)), np.diag([0, 0, 1, 1]), atol=1e-15)


def test_projector_at_unit_frequency(unit_grid):
    zero = np.zeros((2, 2))
    alpha_1 = np.block([[zero, SIGMA_1], [SIGMA_1, zero]])
    gamma_0 = np.diag([1.0, 1.0, -1.0, -1.0])
    expected = 0.5 * (np.eye(4) + (alpha_1 + gamma_0) / math.sqrt(2.0))
    assert_allclose(build_projector(unit_grid, 1.0, "+").at((1, 0, 0)), expected, atol=1e-14)


def test_projector_algebra(small_grid):
    defects = projector_defects(small_grid, 1.0)
    assert set(defects) == {"idempotence", "annihilation", "completeness", "hermiticity", "trace"}
    assert max(defects.values()) <= 1e-12


def test_projectors_are_cached(small_grid):
    assert build_projector(small_grid, 1.0, "+") is build_projector(small_grid, 1.0, 1)


def test_mass_must_be_positive(small_grid):
    with pytest.raises(ValueError):
        build_projector(small_grid, 0.0, 1)
    with pytest.raises(ValueError):
        japanese_bracket(small_grid, -1.0)


def test_broken_table_is_rejected(unit_grid):
    table = np.zeros((4, 4) + unit_grid.shape, dtype=complex)
    with pytest.raises(NumericalError):
        DiracProjector(grid=unit_grid, mass=1.0, theta=1, matrices=table)


def test_apply_projector(small_grid, rng):
    psi = random_spinor(small_grid, rng)
    plus = apply_projector(psi, build_projector(small_grid, 1.0, 1))
    minus = apply_projector(psi, build_projector(small_grid, 1.0, -1))
    assert_allclose((plus + minus).values, psi.values, atol=1e-12)
    assert_allclose(apply_projector(plus, build_projector(small_grid, 1.0, 1)).values, plus.values, atol=1e-12)
    inner = np.vdot(plus.values, minus.values) * small_grid.cell_volume
    assert abs(inner) <= 1e-10 * psi.l2_norm() ** 2
    with pytest.raises(ValueError):
        apply_projector(psi, build_projector(GridSpec(8.0, 8), 1.0, 1))


def test_projector_commutes_with_scalar_multipliers(small_grid, rng):
    psi = random_spinor(small_grid, rng)
    projector = build_projector(small_grid, 2.0, -1)
    analysis = shell_analysis(small_grid, 8)
    for multiplier in (lambda f: project_annulus(f, 1.0), lambda f: project_HN(f, 2, analysis)):
        first = apply_projector(multiplier(psi), projector)
        second = multiplier(apply_projector(psi, projector))
        assert_allclose(first.values, second.values, atol=1e-8)


def test_default_scale(small_grid):
    assert default_scale(small_grid) == 1.0
    assert default_scale(GridSpec(8.0, 64)) == 4.0


def test_separated_blocks_are_orthogonal(small_grid):
    report = dirac_orthogonality_check(small_grid, 1, 8, theta=1, trials=1, max_degree=8)
    assert len(report.samples) == 1
    assert report.samples[0].value <= 1e-6
    assert report.extras["scalar_control"] <= 1e-10


def test_comparable_blocks_carry_no_claim(small_grid):
    report = dirac_orthogonality_check(small_grid, 4, 4, trials=3, max_degree=8)
    assert report.samples == []
    assert report.skipped == 3
    assert report.warnings
