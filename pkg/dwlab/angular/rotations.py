from itertools import combinations
from typing import Tuple

from dwlab.common.log import get_logger
from dwlab.grid.fields import Domain, FieldType
from dwlab.grid.norms import warn_if_not_decaying
from dwlab.grid.transforms import spectral_derivative

logger = get_logger(__name__)

AXIS_PAIRS: Tuple[Tuple[int, int], ...] = tuple(combinations((1, 2, 3), 2))


def rotation_apply(f: FieldType, i: int, j: int) -> FieldType:
    """
    Infinitesimal rotation ``Omega_ij f = x_i d_j f - x_j d_i f``.

    Derivatives are spectral; the coordinate factors are the box coordinates
    centred at ``x = 0``, so ``f`` has to decay before the periodic boundary.
    Spinors are rotated componentwise (no spin part).

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space field.
        i (:obj:`int`): first axis, 1-based.
        j (:obj:`int`): second axis, 1-based.
    """
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError(f"Rotation axes must lie in 1..3, got ({i}, {j})")
    f._require(Domain.PHYSICAL)
    if i == j:
        return f.zeros(f.grid)
    warn_if_not_decaying(f, f"Omega_{i}{j}")
    x = f.grid.mesh()
    d_j = spectral_derivative(f, j - 1).values
    d_i = spectral_derivative(f, i - 1).values
    return f.with_values(x[i - 1] * d_j - x[j - 1] * d_i)


def angular_momentum_norm(f: FieldType) -> float:
    """
    ``||Omega_12 f||^2 + ||Omega_13 f||^2 + ||Omega_23 f||^2``.

    Equals ``sum_l l(l+1) ||f_l||^2`` over the degree-``l`` parts of ``f``.
    """
    f._require(Domain.PHYSICAL)
    warn_if_not_decaying(f, "angular momentum")
    x = f.grid.mesh()
    gradient = [spectral_derivative(f, axis).values for axis in range(3)]
    total = 0.0
    for i, j in AXIS_PAIRS:
        rotated = f.with_values(x[i - 1] * gradient[j - 1] - x[j - 1] * gradient[i - 1])
        total += rotated.l2_norm() ** 2
    return total
