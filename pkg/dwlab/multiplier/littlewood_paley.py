import math
from typing import Iterable, List, Union

import numpy as np

from dwlab.common.log import get_logger
from dwlab.grid.fields import FieldType
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale, dyadic_range

logger = get_logger(__name__)

Scale = Union[DyadicScale, float, int]


def check_annulus_resolution(grid: GridSpec, scale: Scale, homogeneous: bool = True) -> List[str]:
    """
    Validate ``P_lambda`` against the lattice.

    Raises when the annulus misses every lattice frequency; returns warnings
    when its outer edge crosses the Nyquist shell.
    """
    lam = DyadicScale.of(scale).value
    warnings = []
    # largest |xi| on the lattice is sqrt(3) * nyquist
    if lam / 2.0 >= math.sqrt(3.0) * grid.nyquist:
        raise ValueError(
            f"Scale {lam} lies beyond the lattice (Nyquist {grid.nyquist:.4g})"
        )
    if homogeneous and 2.0 * lam <= grid.frequency_spacing:
        raise ValueError(
            f"Scale {lam} is below the lattice spacing {grid.frequency_spacing:.4g}"
        )
    if 2.0 * lam > grid.nyquist:
        warnings.append(
            f"scale {lam:g} is within a factor 2 of Nyquist {grid.nyquist:g}; "
            "the annulus is truncated"
        )
    return warnings


def annulus_symbol(
    grid: GridSpec,
    scale: Scale,
    bump: BumpFunction = DEFAULT_BUMP,
    inhomogeneous: bool = True,
) -> np.ndarray:
    """
    ``rho(|xi| / lambda)`` on the lattice, or ``rho_low(|xi|)`` for the
    inhomogeneous piece at ``lambda = 1`` (which owns ``xi = 0``).
    """
    scale = DyadicScale.of(scale)
    if inhomogeneous and scale.exponent == 0:
        return bump.rho_low(grid.frequency_norm)
    return bump.rho(grid.frequency_norm / scale.value)


def project_annulus(
    f: FieldType,
    scale: Scale,
    bump: BumpFunction = DEFAULT_BUMP,
    inhomogeneous: bool = True,
) -> FieldType:
    """
    Littlewood-Paley projection ``P_lambda f``.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space field.
        scale (:obj:`DyadicScale` or :obj:`float`): the dyadic frequency ``lambda``.
        bump (:obj:`BumpFunction`, `optional`): the dyadic bump.
        inhomogeneous (:obj:`bool`, `optional`, defaults to :obj:`True`):
            use ``rho_low`` for ``lambda = 1``. With :obj:`False` every scale
            uses the annular profile and ``xi = 0`` is never passed.

    Returns:
        The projected field.
    """
    for message in check_annulus_resolution(f.grid, scale, homogeneous=not inhomogeneous):
        logger.warning(message)
    return f.apply_symbol(annulus_symbol(f.grid, scale, bump, inhomogeneous))


def resolved_scales(grid: GridSpec) -> List[DyadicScale]:
    """
    Homogeneous dyadic scales whose annuli meet the lattice, from the first
    one covering ``pi / L`` to the one covering the lattice corner.
    """
    low = grid.frequency_spacing / 2.0
    high = math.sqrt(3.0) * grid.nyquist
    return [s for s in dyadic_range(low, high) if 2.0 * s.value > grid.frequency_spacing]


def littlewood_paley_sum(
    f: FieldType,
    scales: Iterable[Scale],
    bump: BumpFunction = DEFAULT_BUMP,
) -> FieldType:
    """``sum_lambda P_lambda f`` with homogeneous annuli, in one transform."""
    symbol = np.zeros(f.grid.shape)
    for scale in scales:
        symbol = symbol + annulus_symbol(f.grid, scale, bump, inhomogeneous=False)
    return f.apply_symbol(symbol)
