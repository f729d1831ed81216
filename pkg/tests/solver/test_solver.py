import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import gaussian
from dwlab.grid.fields import ScalarField, SpacetimeField, SpinorField
from dwlab.grid.io import load_snapshot
from dwlab.grid.spec import GridSpec
from dwlab.propagator.dispersion import WAVE
from dwlab.propagator.evolution import WaveDataPair
from dwlab.solver.config import PicardConfig, SolveReport
from dwlab.nonlinear.potentials import inverse_derivative_symbol
from dwlab.solver.diagnostics import residual_check, scattering_diagnostic, wave_data_norm
from dwlab.solver.picard import picard_solve
from dwlab.solver.systems import Solution, initial_components


@pytest.fixture
def mode_grid() -> GridSpec:
    # frequency spacing 1
    return GridSpec(math.pi, 8)


def plane_wave(grid: GridSpec) -> ScalarField:
    x1, _, _ = grid.mesh()
    return ScalarField(grid=grid, values=np.broadcast_to(np.exp(1j * x1), grid.shape))


def complex_pair(grid: GridSpec):
    """Half-wave data whose sum is genuinely complex, so that ``Q_ij(u_bar, u) != 0``."""
    return gaussian(grid), gaussian(grid, center=(1.0, 0.0, 0.0)) * 1j


@pytest.mark.parametrize(
    "overrides",
    [
        {"system": "heat"},
        {"eps": 0.0},
        {"dt": 8.0},
        {"dt": 0.0},
        {"max_iter": 1},
        {"tol": 0.0},
        {"kind": "Q21"},
        {"snapshot_stride": -1},
        {"system": "dirac_hartree", "b": 0.0},
    ],
)
def test_config_validation(overrides):
    with pytest.raises(ValueError):
        PicardConfig(**overrides)


def test_config_from_dict():
    cfg = PicardConfig.from_dict({"kind": "Q0", "T": 1.0, "dt": 0.25})
    assert cfg.kind == "Q0"
    assert cfg.null_form.is_q0
    assert_allclose(cfg.times, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert cfg.law is WAVE
    assert PicardConfig(system="dirac_hartree", mass=2.0).law.mass == 2.0
    with pytest.raises(ValueError, match="Unknown solver keys"):
        PicardConfig.from_dict({"eps": 0.1, "steps": 3})


def test_initial_components_reject_wrong_data(small_grid):
    spinor = SpinorField.zeros(small_grid)
    with pytest.raises(ValueError):
        initial_components(spinor, PicardConfig())
    with pytest.raises(ValueError):
        data = WaveDataPair(gaussian(small_grid), gaussian(small_grid))
        initial_components(data, PicardConfig(system="dirac_hartree"))


def test_solution_needs_both_signs(small_grid):
    path = SpacetimeField.from_frames([gaussian(small_grid)] * 3, 0.1)
    with pytest.raises(ValueError):
        Solution(components={1: path}, law=WAVE, system="wave_null")


def test_zero_data(small_grid):
    zero = ScalarField.zeros(small_grid)
    cfg = PicardConfig(T=1.0, dt=0.25)
    solution, report = picard_solve(WaveDataPair(zero, zero), cfg)
    assert report.iterations == 1
    assert report.differences == [0.0]
    assert report.converged and not report.non_contraction
    assert report.residual == 0.0
    assert report.charge_drift == 0.0
    assert report.scattering["combined"] == [0.0, 0.0, 0.0]
    assert solution.sample_count == 5


def test_real_wave_data_is_a_fixed_point_of_q12(small_grid):
    data = WaveDataPair(gaussian(small_grid), ScalarField.zeros(small_grid))
    solution, report = picard_solve(data, PicardConfig(kind="Q12", T=2.0, dt=0.1))
    assert report.iterations == 1
    assert report.converged
    assert report.residual <= 1e-10
    assert max(report.scattering["combined"]) <= 1e-12
    assert set(report.scattering["differences"]) == {"+1", "-1"}
    assert_allclose(solution.frame(0).values, solution.total.frame(0).values)
    assert_allclose(np.abs(np.imag(solution.frame(10).values)).max(), 0.0, atol=1e-14)


def test_small_wave_data_contracts(small_grid):
    _, report = picard_solve(complex_pair(small_grid), PicardConfig(eps=1e-2, T=2.0, dt=0.1, max_iter=10))
    assert report.converged
    assert report.ratios and max(report.ratios) <= 0.5
    assert report.differences[0] > 0
    assert report.residual <= 1e-3 * report.data_norm


def test_wave_first_correction_is_quadratic(small_grid):
    data = complex_pair(small_grid)
    corrections = []
    for eps in (1e-2, 5e-3):
        _, report = picard_solve(data, PicardConfig(eps=eps, T=1.0, dt=0.1, max_iter=2))
        corrections.append(report.first_correction())
    assert corrections[1] > 0
    assert_allclose(corrections[0] / corrections[1], 4.0, rtol=1e-6)


def test_dirac_first_correction_is_cubic(small_grid):
    zero = ScalarField.zeros(small_grid)
    psi = SpinorField.from_components([gaussian(small_grid), gaussian(small_grid, center=(0.0, 1.0, 0.0)), zero, zero])
    corrections = []
    for eps in (1e-1, 5e-2):
        cfg = PicardConfig(system="dirac_hartree", eps=eps, T=1.0, dt=0.1, max_iter=2)
        _, report = picard_solve(psi, cfg)
        corrections.append(report.first_correction())
    assert corrections[1] > 0
    assert_allclose(corrections[0] / corrections[1], 8.0, rtol=1e-6)


def test_dirac_plane_wave(mode_grid):
    zero = ScalarField.zeros(mode_grid)
    psi = SpinorField.from_components([plane_wave(mode_grid), zero, zero, zero])
    cfg = PicardConfig(system="dirac_hartree", T=2.0, dt=0.05)
    solution, report = picard_solve(psi, cfg)
    assert report.converged
    assert not report.non_contraction
    assert report.charge_drift <= 1e-4
    assert report.projector_leakage <= 1e-8
    assert_allclose(report.data_norm, cfg.eps)
    assert solution.component(1).components == 4


def test_large_data_does_not_contract(small_grid):
    _, report = picard_solve(complex_pair(small_grid), PicardConfig(eps=100.0, T=2.0, dt=0.1, max_iter=4))
    assert report.non_contraction
    assert not report.converged
    assert any("contraction ratio" in w for w in report.warnings)
    assert len(report.differences) == 4


def test_unnormalized_data_warns(small_grid):
    cfg = PicardConfig(eps=1e-3, T=1.0, dt=0.25, normalize=False, max_iter=2)
    _, report = picard_solve(WaveDataPair(gaussian(small_grid), ScalarField.zeros(small_grid)), cfg)
    assert report.data_norm > cfg.eps
    assert any("exceeds eps" in w for w in report.warnings)


def _manufactured(grid: GridSpec, dt: float):
    """``u_+- = cos(t) e^{i x_1}`` and the forcing that makes it exact on a ``|xi| = 1`` mode."""
    mode = plane_wave(grid)
    times = dt * np.arange(int(round(2.0 / dt)) + 1)
    u = SpacetimeField.from_frames([mode * math.cos(t) for t in times], dt)
    forcing = {
        theta: SpacetimeField.from_frames([mode * (1j * math.sin(t) + theta * math.cos(t)) for t in times], dt)
        for theta in (1, -1)
    }
    return Solution(components={1: u, -1: u}, law=WAVE, system="wave_null"), forcing


def test_manufactured_residual_is_second_order(mode_grid):
    residuals = []
    for dt in (0.1, 0.05):
        solution, forcing = _manufactured(mode_grid, dt)
        residuals.append(residual_check(solution, PicardConfig(), forcing=lambda _: forcing))
    assert residuals[1] <= 3e-3 * plane_wave(mode_grid).l2_norm()
    assert residuals[0] / residuals[1] >= 3.5


def test_residual_needs_three_frames(mode_grid):
    path = SpacetimeField.from_frames([plane_wave(mode_grid)] * 2, 0.1)
    solution = Solution(components={1: path, -1: path}, law=WAVE, system="wave_null")
    with pytest.raises(ValueError):
        residual_check(solution, PicardConfig())


def test_scattering_sample_times(small_grid):
    solution, _ = picard_solve(complex_pair(small_grid), PicardConfig(T=1.0, dt=0.25, max_iter=2))
    diagnostic = scattering_diagnostic(solution, sample_times=[0.25, 0.5, 1.0], theta=1)
    assert set(diagnostic["differences"]) == {"+1"}
    assert len(diagnostic["combined"]) == 2
    with pytest.raises(ValueError, match="outside the window"):
        scattering_diagnostic(solution, sample_times=[0.5, 4.0])


def test_snapshots_and_report(small_grid, tmp_path):
    cfg = PicardConfig(
        T=1.0, dt=0.25, max_iter=2, snapshot_dir=str(tmp_path / "snaps"), snapshot_stride=2, name="snap"
    )
    solution, report = picard_solve(complex_pair(small_grid), cfg)
    assert [p.split("/")[-1] for p in report.snapshots] == ["snap_00000.dwl", "snap_00002.dwl", "snap_00004.dwl"]
    assert_allclose(load_snapshot(report.snapshots[1]).values, solution.frame(2).values)

    path = report.save(tmp_path / "snap.json")
    document = SolveReport(name="x", system="wave_null", config={}).to_dict(timestamp=False)
    assert "created" not in document
    assert path.read_text().count('"iterations"') == 1


def test_wave_data_norm():
    grid = GridSpec(half_period=8.0, points_per_axis=32)
    g = gaussian(grid)
    expected = g.apply_symbol(np.sqrt(grid.frequency_norm)).l2_norm()
    # degree zero carries no angular weight
    assert_allclose(wave_data_norm(WaveDataPair(g, g * 0.0), sigma=2.0), expected, rtol=1e-10)
    dipole = g.with_values(grid.mesh()[0] * g.values)
    expected = math.sqrt(3.0) * dipole.apply_symbol(inverse_derivative_symbol(grid, 0.5)).l2_norm()
    assert_allclose(wave_data_norm(WaveDataPair(g * 0.0, dipole), sigma=1.0), expected, rtol=1e-6)
