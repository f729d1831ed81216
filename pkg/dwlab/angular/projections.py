import math
from typing import Iterable, List, Optional, Union

import numpy as np

from dwlab.angular.shells import DegreeWeights, ShellAnalysis, shell_analysis
from dwlab.common.log import get_logger
from dwlab.grid.fields import FieldType
from dwlab.grid.transforms import fft_forward, fft_inverse
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.littlewood_paley import resolved_scales

logger = get_logger(__name__)

Scale = Union[DyadicScale, float, int]


def hn_weights(N: Scale, bump: BumpFunction = DEFAULT_BUMP) -> DegreeWeights:
    """Degree weights of ``H_N``: ``rho(l / N)``, or ``rho_low(l)`` for ``N = 1``."""
    scale = DyadicScale.of(N)
    if scale.exponent < 0:
        raise ValueError(f"H_N needs N >= 1, got {scale.value}")
    if scale.exponent == 0:
        return lambda degrees: bump.rho_low(np.asarray(degrees, dtype=float))
    return lambda degrees: bump.rho(np.asarray(degrees, dtype=float) / scale.value)


def hn_support(N: Scale, max_degree: int, bump: BumpFunction = DEFAULT_BUMP) -> List[int]:
    """Degrees ``l <= max_degree`` carrying a nonzero ``H_N`` weight."""
    degrees = np.arange(max_degree + 1)
    return [int(d) for d in degrees[hn_weights(N, bump)(degrees) > 0]]


def omega_weights(sigma: float) -> DegreeWeights:
    """``(1 + l(l+1))^{sigma/2}``."""

    def weights(degrees: np.ndarray) -> np.ndarray:
        degrees = np.asarray(degrees, dtype=float)
        return (1.0 + degrees * (degrees + 1.0)) ** (sigma / 2.0)

    return weights


def apply_angular_weights(
    f: FieldType,
    weights: DegreeWeights,
    analysis: Optional[ShellAnalysis] = None,
) -> FieldType:
    """Multiply the degree-``l`` content of ``f`` (about ``x = 0``) by ``weights(l)``."""
    analysis = analysis or shell_analysis(f.grid)
    if analysis.grid != f.grid:
        raise ValueError(f"Shell analysis built on {analysis.grid}, field on {f.grid}")
    f_hat = fft_forward(f)
    weighted = analysis.apply_degree_weights(f_hat.values, weights)
    return fft_inverse(f_hat.with_values(weighted))


def project_HN(
    f: FieldType,
    N: Scale,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> FieldType:
    """
    Spherical Littlewood-Paley piece ``H_N f``.

    Computed on the frequency side, shell by shell, which is legitimate because
    ``H_N`` commutes with radial multipliers. Spinors are projected
    componentwise.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space field.
        N (:obj:`DyadicScale` or :obj:`int`): the angular scale, ``N >= 1``.
        analysis (:obj:`ShellAnalysis`, `optional`): shared per grid when omitted.
    """
    return apply_angular_weights(f, hn_weights(N, bump), analysis)


def apply_omega_weight(
    f: FieldType,
    sigma: float,
    analysis: Optional[ShellAnalysis] = None,
) -> FieldType:
    """``<Omega>^sigma f = (1 - Lap_{S^2})^{sigma/2} f``."""
    if sigma == 0:
        return f.with_values(f.values)
    return apply_angular_weights(f, omega_weights(sigma), analysis)


def angular_residual(f: FieldType, analysis: Optional[ShellAnalysis] = None) -> float:
    """Share of ``||f^||^2`` beyond the per-shell degree caps."""
    analysis = analysis or shell_analysis(f.grid)
    fraction = analysis.residual_fraction(fft_forward(f).values)
    logger.debug(f"Angular analysis residual {fraction:.3e}")
    return fraction


def angular_scales(max_degree: int) -> List[DyadicScale]:
    """``N = 1, 2, 4, ...`` up to the first scale covering ``max_degree + 1``."""
    top = max(1, int(math.ceil(math.log2(max_degree + 2))))
    return [DyadicScale(k) for k in range(top + 1)]


def angular_sobolev_norm(
    f: FieldType,
    s: float = 0.0,
    sigma: float = 1.0,
    analysis: Optional[ShellAnalysis] = None,
    scales: Optional[Iterable[Scale]] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> float:
    """
    ``(sum_lambda sum_N lambda^{2s} N^{2 sigma} ||P_lambda H_N f||^2)^{1/2}``.

    Homogeneous annuli over :func:`resolved_scales`; the ``xi = 0`` mode does
    not contribute.
    """
    analysis = analysis or shell_analysis(f.grid)
    grid = f.grid
    f_hat = fft_forward(f).values
    scales = list(scales) if scales is not None else resolved_scales(grid)
    measure = (grid.frequency_spacing / (2.0 * math.pi)) ** 3
    total = 0.0
    for n_scale in angular_scales(analysis.max_degree):
        piece = analysis.apply_degree_weights(f_hat, hn_weights(n_scale, bump))
        for lam in scales:
            lam = DyadicScale.of(lam).value
            annulus = bump.rho(grid.frequency_norm / lam)
            energy = float(np.sum(np.abs(annulus * piece) ** 2)) * measure
            total += lam ** (2.0 * s) * n_scale.value ** (2.0 * sigma) * energy
    return math.sqrt(total)
