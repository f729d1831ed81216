import math
from typing import Optional, Union

import numpy as np

from dwlab.angular.projections import Scale, hn_support, project_HN
from dwlab.angular.shells import ShellAnalysis, shell_analysis
from dwlab.angular.spectrum import AngularSpectrum
from dwlab.angular.synthesis import synthesize_spinor
from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign
from dwlab.dirac.projector import apply_projector, build_projector
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.littlewood_paley import check_annulus_resolution
from dwlab.normbench.report import ProbeReport

logger = get_logger(__name__)

ORTHOGONALITY_ESTIMATE = "H_N Pi_theta H_N' = 0 unless N ~ N'"


def default_scale(grid: GridSpec) -> float:
    """Largest power of two not above ``nyquist / 2``."""
    return 2.0 ** math.floor(math.log2(grid.nyquist / 2.0))


def random_spinor_spectra(
    scale: float,
    top_degree: int,
    rng: np.random.Generator,
    max_degree: int,
) -> list:
    """Four random spectra over degrees ``0..top_degree`` with the annulus profile at ``scale``."""
    spectra = []
    for _ in range(4):
        spectrum = AngularSpectrum(max_degree=max_degree)
        for degree in range(top_degree + 1):
            for n in range(2 * degree + 1):
                c = complex(rng.standard_normal(), rng.standard_normal())
                spectrum.add(degree, n, c, "annulus", scale=scale)
        spectra.append(spectrum)
    return spectra


def dirac_orthogonality_check(
    grid: GridSpec,
    N: Scale,
    N_prime: Scale,
    theta: Union[int, str] = 1,
    mass: float = 1.0,
    scale: Optional[float] = None,
    trials: int = 2,
    seed: int = 0,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> ProbeReport:
    """
    ``max ||H_N Pi_theta H_N' psi|| / ||psi||`` over random spinors.

    The spinors are spectrally synthesised with one degree of margin, so the
    degree shift of ``Pi_theta`` (its symbol is linear in ``xi / <xi>``) stays
    inside the resolved band of every shell. Pairs with
    ``|log2(N / N')| < 2`` carry no claim and are reported as skipped. The
    scalar control ``||H_N H_N' psi_1|| / ||psi_1||`` is stored in ``extras``.
    """
    theta = coerce_sign(theta)
    n_scale, n_prime_scale = DyadicScale.of(N), DyadicScale.of(N_prime)
    lam = DyadicScale.of(scale if scale is not None else default_scale(grid)).value
    report = ProbeReport(
        name="dirac_orthogonality",
        estimate=ORTHOGONALITY_ESTIMATE,
        params={
            "N": n_scale.value,
            "N_prime": n_prime_scale.value,
            "theta": theta,
            "mass": mass,
            "lambda": lam,
            "trials": trials,
        },
        environment={"grid": grid.to_dict(), "bump": bump.identifier, "seed": seed},
    )
    if abs(n_scale.exponent - n_prime_scale.exponent) < 2:
        report.warn(f"N={n_scale.value:g} and N'={n_prime_scale.value:g} are comparable; no claim")
        report.skipped += trials
        return report
    for message in check_annulus_resolution(grid, lam):
        report.warn(message)

    analysis = analysis or shell_analysis(grid, max_degree)
    support = hn_support(n_scale, max_degree, bump) + hn_support(n_prime_scale, max_degree, bump)
    top_degree = min(max(support) + 1, max_degree - 1)
    projector = build_projector(grid, mass, theta)
    rng = np.random.default_rng(seed)

    worst, worst_scalar = 0.0, 0.0
    for _ in range(trials):
        psi = synthesize_spinor(random_spinor_spectra(lam, top_degree, rng, max_degree), grid, analysis, margin=1)
        norm = psi.l2_norm()
        if norm == 0.0:
            report.skipped += 1
            continue
        inner = project_HN(psi, n_prime_scale, analysis, bump)
        outer = project_HN(apply_projector(inner, projector), n_scale, analysis, bump)
        worst = max(worst, outer.l2_norm() / norm)

        scalar = psi.component(0)
        control = project_HN(project_HN(scalar, n_prime_scale, analysis, bump), n_scale, analysis, bump)
        if scalar.l2_norm() > 0:
            worst_scalar = max(worst_scalar, control.l2_norm() / scalar.l2_norm())

    report.add_sample(worst, N=n_scale.value, N_prime=n_prime_scale.value)
    report.extras["scalar_control"] = worst_scalar
    logger.debug(f"H_N Pi H_N' ratio {worst:.2e}, scalar control {worst_scalar:.2e}")
    return report
