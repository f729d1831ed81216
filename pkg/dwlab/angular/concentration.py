from typing import Optional, Sequence

import numpy as np

from dwlab.angular.projections import Scale
from dwlab.angular.shells import ShellAnalysis, shell_analysis
from dwlab.angular.synthesis import (
    concentration_witness,
    random_localized_spectrum,
    synthesize_spectral,
)
from dwlab.common.log import get_logger
from dwlab.grid.fields import FieldType
from dwlab.grid.norms import lebesgue_norm
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import fft_forward
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.caps import CapCollection, angular_resolution_warning
from dwlab.multiplier.littlewood_paley import check_annulus_resolution
from dwlab.normbench.report import ProbeReport

logger = get_logger(__name__)

CONCENTRATION_ESTIMATE = "||R_kappa P_lambda H_N f||_p <~ (alpha N)^s ||P_lambda H_N f||_p"


def _ranked_caps(collection: CapCollection, grid: GridSpec, energy: np.ndarray):
    """
    Caps meeting the support of ``energy``, ranked by ``sum |f^|^2 rho_kappa^2``.
    A cap outside the support has ``R_kappa f = 0`` and is left out.
    """
    # round-off floor of the transform; xi = 0 belongs to no cap
    support = np.flatnonzero((energy > 1e-20 * energy.max()) & (grid.frequency_norm > 0))
    if support.size == 0:
        return []
    xi1, xi2, xi3 = np.broadcast_arrays(*grid.frequency_mesh())
    norm = grid.frequency_norm.flat[support]
    omega = [component.flat[support] / norm for component in (xi1, xi2, xi3)]
    normalizer = collection.normalizer(grid).flat[support]
    density = energy.flat[support]
    captured = np.array(
        [np.sum(density * (collection.raw_weight(cap, *omega) / normalizer) ** 2) for cap in collection]
    )
    order = np.argsort(captured)[::-1]
    return [collection.caps[k] for k in order if captured[k] > 0]


def concentration_probe(
    grid: GridSpec,
    scale: Scale,
    N: Scale,
    alpha: float,
    p: float = 4.0,
    s: float = 0.25,
    trials: int = 4,
    seed: int = 0,
    max_degree: int = 16,
    max_caps: Optional[int] = None,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
    fields: Optional[Sequence[FieldType]] = None,
) -> ProbeReport:
    """
    Angular concentration ratio
    ``max_kappa ||R_kappa P_lambda H_N f||_p / ((alpha N)^s ||P_lambda H_N f||_p)``.

    Inputs are spectrally synthesised ``P_lambda H_N`` data: the zonal
    concentration witness plus ``trials`` random spectra, unless ``fields`` are
    given explicitly. Every cap meeting the spectral support is evaluated; a
    ``max_caps`` limit keeps only the caps capturing the most spectral energy
    and is recorded as a warning.

    Returns:
        :obj:`ProbeReport`: one sample (the normalised maximum over inputs and
        caps) with parameters ``lambda``, ``N``, ``alpha`` and ``alpha_n``.
    """
    lam = DyadicScale.of(scale).value
    n_value = DyadicScale.of(N).value
    if not 2.0 <= p < np.inf:
        raise ValueError(f"Concentration needs 2 <= p < inf, got {p}")
    if not 0.0 <= s < 2.0 / p:
        raise ValueError(f"Concentration needs 0 <= s < 2/p = {2.0 / p:.4g}, got {s}")
    alpha_n = alpha * n_value
    report = ProbeReport(
        name="concentration",
        estimate=CONCENTRATION_ESTIMATE,
        params={"lambda": lam, "N": n_value, "alpha": alpha, "p": p, "s": s, "trials": trials},
        environment={"grid": grid.to_dict(), "bump": bump.identifier, "seed": seed},
    )
    for message in check_annulus_resolution(grid, lam):
        report.warn(message)
    message = angular_resolution_warning(grid, alpha, lam)
    if message:
        report.warn(message)

    if fields is None:
        analysis = analysis or shell_analysis(grid, max_degree)
        rng = np.random.default_rng(seed)
        spectra = [concentration_witness(lam, n_value, max_degree, bump)]
        spectra += [random_localized_spectrum(lam, n_value, rng, max_degree, bump) for _ in range(trials)]
        fields = [synthesize_spectral(spectrum, grid, analysis) for spectrum in spectra]

    collection = CapCollection(alpha)
    best = 0.0
    best_cap = None
    truncated = 0
    for index, f in enumerate(fields):
        denominator = lebesgue_norm(f, p)
        if denominator == 0.0:
            report.skipped += 1
            continue
        energy = np.abs(fft_forward(f).values) ** 2
        caps = _ranked_caps(collection, grid, energy)
        if max_caps is not None and len(caps) > max_caps:
            truncated += 1
            caps = caps[:max_caps]
        for cap in caps:
            ratio = lebesgue_norm(f.apply_symbol(collection.weight(cap, grid)), p) / denominator
            if ratio > best:
                best, best_cap = ratio, (index, cap)

    if truncated:
        report.warn(
            f"Cap scan limited to the {max_caps} most energetic of {len(collection)} caps "
            f"on {truncated} input(s); the maximum over caps may be underestimated"
        )
    report.extras["max_caps"] = max_caps
    normalized = best / alpha_n**s
    report.add_sample(normalized, **{"lambda": lam, "N": n_value, "alpha": alpha, "alpha_n": alpha_n})
    report.extras["ratio"] = best
    if best_cap is not None:
        report.extras["cap"] = {
            "input": "witness" if best_cap[0] == 0 else f"random-{best_cap[0]}",
            "index": best_cap[1].index,
            "center": best_cap[1].center,
        }
    logger.debug(f"concentration lambda={lam:g} N={n_value:g} alpha={alpha:g}: {normalized:.4g}")
    return report
