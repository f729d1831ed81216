import math
from typing import Sequence

import numpy as np

from dwlab.common.log import get_logger
from dwlab.grid.fields import Domain, FieldType, SpacetimeField

logger = get_logger(__name__)


def _check_exponent(p: float, name: str = "p"):
    if not p >= 1:
        raise ValueError(f"Lebesgue exponent {name} must be >= 1, got {p}")


def lebesgue_norm(f: FieldType, p: float) -> float:
    """
    Riemann-sum approximation of ``||f||_{L^p_x}``.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`):
            Physical-space field. Spinors use the pointwise C^4 magnitude.
        p (:obj:`float`):
            Exponent in ``[1, inf]``.

    Returns:
        :obj:`float`: the norm.
    """
    _check_exponent(p)
    f._require(Domain.PHYSICAL)
    magnitude = f.pointwise_magnitude()
    if math.isinf(p):
        return float(magnitude.max())
    peak = magnitude.max()
    if peak == 0.0:
        return 0.0
    # scale out the peak so large p does not overflow
    total = np.sum((magnitude / peak) ** p) * f.grid.cell_volume
    return float(peak * total ** (1.0 / p))


def trapezoid_weights(sample_count: int, time_step: float) -> np.ndarray:
    """Trapezoid weights ``[1/2, 1, ..., 1, 1/2] * dt``."""
    if sample_count < 2:
        raise ValueError(f"Trapezoid rule needs >= 2 samples, got {sample_count}")
    weights = np.full(sample_count, time_step, dtype=float)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


def mixed_norm_from_frame_norms(
    frame_norms: Sequence[float], time_step: float, q: float
) -> float:
    """
    ``L^q_t`` composition of precomputed per-frame spatial norms.
    """
    _check_exponent(q, "q")
    norms = np.asarray(frame_norms, dtype=float)
    if math.isinf(q):
        return float(norms.max()) if norms.size else 0.0
    weights = trapezoid_weights(norms.size, time_step)
    peak = norms.max()
    if peak == 0.0:
        return 0.0
    return float(peak * np.sum(weights * (norms / peak) ** q) ** (1.0 / q))


def mixed_norm(u: SpacetimeField, q: float, r: float) -> float:
    """
    ``||u||_{L^q_t L^r_x}`` with the trapezoid rule in time.

    Args:
        u (:obj:`SpacetimeField`): at least two frames.
        q (:obj:`float`): time exponent.
        r (:obj:`float`): space exponent.
    """
    _check_exponent(q, "q")
    _check_exponent(r, "r")
    if u.sample_count < 2:
        raise ValueError(f"Mixed norms need K >= 2 frames, got {u.sample_count}")
    return mixed_norm_from_frame_norms(
        [lebesgue_norm(frame, r) for frame in u], u.time_step, q
    )


def frequency_l2_norm(f_hat: FieldType) -> float:
    """``(2 pi)^{-3/2} ||f^||_{L^2_xi}`` on the frequency lattice."""
    f_hat._require(Domain.FREQUENCY)
    weight = (f_hat.grid.frequency_spacing / (2.0 * math.pi)) ** 3
    return float(np.sqrt(np.sum(f_hat.pointwise_magnitude() ** 2) * weight))


def boundary_mass(f: FieldType, width: float | None = None) -> float:
    """
    Fraction of ``||f||^2_{L^2}`` carried by cells within ``width`` of a box face.

    Used to flag torus artifacts: values above ~1e-8 mean the field is not
    decaying before the periodic boundary. ``width`` defaults to ``L / 8``.
    """
    f._require(Domain.PHYSICAL)
    grid = f.grid
    width = grid.half_period / 8.0 if width is None else width
    x = grid.coordinates
    near = (x < -grid.half_period + width) | (x > grid.half_period - width)
    near_3d = near[:, None, None] | near[None, :, None] | near[None, None, :]
    density = f.pointwise_magnitude() ** 2
    total = density.sum()
    if total == 0.0:
        return 0.0
    return float(density[near_3d].sum() / total)


def warn_if_not_decaying(f: FieldType, what: str, threshold: float = 1e-8) -> float | None:
    """Log a torus-artifact warning and return the offending boundary mass."""
    mass = boundary_mass(f)
    if mass > threshold:
        logger.warning(
            f"{what}: {mass:.2e} of the L2 mass sits near the periodic boundary; "
            "torus artifacts are likely"
        )
        return mass
    return None
