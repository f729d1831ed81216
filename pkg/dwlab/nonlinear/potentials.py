import math

import numpy as np
from scipy.integrate import quad

from dwlab.common.log import get_logger
from dwlab.grid.fields import FieldType
from dwlab.grid.spec import GridSpec
from dwlab.propagator.evolution import ZERO_MODE_TOLERANCE, zero_mode_content

logger = get_logger(__name__)


def inverse_derivative_symbol(grid: GridSpec, s: float) -> np.ndarray:
    """``|xi|^{-s}`` with the ``xi = 0`` bin set to 0."""
    norm = grid.frequency_norm
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, safe ** (-float(s)), 0.0)


def inverse_derivative(f: FieldType, s: float, warn: bool = True) -> FieldType:
    """
    ``|D|^{-s} f``. The zero mode is removed; content above ``1e-10`` is logged,
    as a warning unless ``warn`` is off. Use :func:`zero_mode_content` to record
    the removed magnitude.
    """
    if not s >= 0:
        raise ValueError(f"Inverse derivative order must be >= 0, got {s}")
    removed = zero_mode_content(f)
    if removed > ZERO_MODE_TOLERANCE:
        (logger.warning if warn else logger.debug)(f"Zero mode {removed:.2e} removed before |D|^-{s:g}")
    return f.apply_symbol(inverse_derivative_symbol(f.grid, s))


def _check_range(b: float):
    if not b > 0 or not math.isfinite(b):
        raise ValueError(f"Yukawa range parameter b must be positive and finite, got {b}")


def yukawa_kernel(r: np.ndarray, b: float) -> np.ndarray:
    """``V_b(r) = e^{-b r} / (4 pi r)``."""
    _check_range(b)
    r = np.asarray(r, dtype=float)
    return np.exp(-b * r) / (4.0 * math.pi * r)


def yukawa_symbol(grid: GridSpec, b: float) -> np.ndarray:
    """``V_b^(xi) = 1 / (b^2 + |xi|^2)``, equally the symbol of ``<D>_b^{-2}``."""
    _check_range(b)
    return 1.0 / (b**2 + grid.frequency_norm**2)


def yukawa_convolve(f: FieldType, b: float) -> FieldType:
    """``V_b * f`` through the closed-form symbol."""
    return f.apply_symbol(yukawa_symbol(f.grid, b))


def yukawa_symbol_by_quadrature(k: float, b: float) -> float:
    """
    ``int V_b(x) e^{-i x . xi} dx`` at ``|xi| = k`` from the radial kernel:
    ``(4 pi / k) int_0^inf r V_b(r) sin(k r) dr``, or ``4 pi int r^2 V_b dr`` at ``k = 0``.
    """
    _check_range(b)
    if k == 0.0:
        value, _ = quad(lambda r: 4.0 * math.pi * r**2 * float(yukawa_kernel(r, b)), 0.0, np.inf)
        return value
    value, _ = quad(lambda r: 4.0 * math.pi * r * float(yukawa_kernel(r, b)), 0.0, np.inf, weight="sin", wvar=k)
    return value / k
