import math
from typing import Tuple, Union

import numpy as np
import scipy.fft as sfft

from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign, fft_workers
from dwlab.grid.fields import SpacetimeField
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale, smooth_step
from dwlab.propagator.dispersion import WAVE, DispersionLaw

logger = get_logger(__name__)

DEFAULT_ROLL_OFF = 0.1
LEAKAGE_PADDING = 8

Modulation = Union[DyadicScale, float]


def temporal_taper(sample_count: int, roll_off: float = DEFAULT_ROLL_OFF) -> np.ndarray:
    """
    C^inf window on ``K`` samples: 1 in the middle, smooth roll-off over the
    first and last ``roll_off`` fraction, 0 at both endpoints.
    """
    if not 0 < roll_off <= 0.5:
        raise ValueError(f"roll_off must lie in (0, 1/2], got {roll_off}")
    x = np.linspace(0.0, 1.0, sample_count)
    return smooth_step(x / roll_off) * smooth_step((1.0 - x) / roll_off)


def temporal_frequencies(sample_count: int, time_step: float) -> np.ndarray:
    """Angular frequencies ``tau`` of the time DFT."""
    return 2.0 * math.pi * sfft.fftfreq(sample_count, d=time_step)


def check_modulation_resolution(sample_count: int, time_step: float, d: float):
    resolution = 2.0 * math.pi / (sample_count * time_step)
    if resolution > d / 4.0:
        raise ValueError(
            f"Window K*dt={sample_count * time_step:g} resolves modulations down to "
            f"{4.0 * resolution:.4g}, cannot project at d={d:.4g}"
        )


def taper_leakage(
    sample_count: int,
    time_step: float,
    d: float,
    roll_off: float = DEFAULT_ROLL_OFF,
) -> float:
    """
    Fraction of the taper's spectral energy at ``|tau| > d / 2``.

    A free wave has modulation 0, so this bounds ``||C_d u||^2 / ||w u||^2``.
    The spectrum is read off an ``8x`` zero-padded transform.
    """
    window = temporal_taper(sample_count, roll_off)
    padded = LEAKAGE_PADDING * sample_count
    energy = np.abs(sfft.fft(window, n=padded)) ** 2
    tau = temporal_frequencies(padded, time_step)
    total = energy.sum()
    if total == 0:
        return 0.0
    return float(energy[np.abs(tau) > d / 2.0].sum() / total)


def modulation_symbol(
    grid: GridSpec,
    sample_count: int,
    time_step: float,
    d: float,
    theta: int,
    law: DispersionLaw = WAVE,
    cumulative: bool = False,
    bump: BumpFunction = DEFAULT_BUMP,
) -> np.ndarray:
    """
    ``rho(|tau + theta h(xi)| / d)``, or ``chi(...)`` for the cumulative
    ``C_{<=d}``, on the ``(tau, xi)`` lattice of shape ``(K,) + grid.shape``.
    """
    tau = temporal_frequencies(sample_count, time_step)
    distance = np.abs(tau[:, None, None, None] + theta * law.symbol(grid)[None])
    profile = bump.rho_low if cumulative else bump.rho
    return profile(distance / d)


def project_modulation(
    u: SpacetimeField,
    d: Modulation,
    theta: Union[int, str],
    law: DispersionLaw = WAVE,
    cumulative: bool = False,
    bump: BumpFunction = DEFAULT_BUMP,
    roll_off: float = DEFAULT_ROLL_OFF,
) -> Tuple[SpacetimeField, float]:
    """
    Space-time modulation projection ``C^theta_d`` (or ``C^theta_{<=d}``).

    The path is multiplied by :func:`temporal_taper` before the time transform;
    the output is the projection of the tapered path.

    Args:
        u (:obj:`SpacetimeField`): the path.
        d (:obj:`DyadicScale` or :obj:`float`): modulation size.
        theta (:obj:`int` or :obj:`str`): cone sign.
        law (:obj:`DispersionLaw`, `optional`): ``|xi|`` by default.
        cumulative (:obj:`bool`, `optional`): project onto modulations ``<= d``.

    Returns:
        :obj:`Tuple[SpacetimeField, float]`: the projected path and the
        window leakage estimate from :func:`taper_leakage`.
    """
    theta = coerce_sign(theta)
    d = float(d)
    if not d > 0:
        raise ValueError(f"Modulation size must be positive, got {d}")
    check_modulation_resolution(u.sample_count, u.time_step, d)

    frames = u.frames
    window = temporal_taper(u.sample_count, roll_off)
    window = window.reshape((-1,) + (1,) * (frames.ndim - 1))
    axes = (0, -3, -2, -1)
    spectrum = sfft.fftn(window * frames, axes=axes, workers=fft_workers())
    symbol = modulation_symbol(
        u.grid, u.sample_count, u.time_step, d, theta, law, cumulative, bump
    )
    if u.components > 1:
        symbol = symbol[:, None]
    projected = sfft.ifftn(spectrum * symbol, axes=axes, workers=fft_workers())

    leakage = taper_leakage(u.sample_count, u.time_step, d, roll_off)
    logger.debug(f"C^{theta:+d}_{'<=' if cumulative else ''}{d:.4g}: leakage {leakage:.2e}")
    return u.with_frames(projected), leakage


def tapered(u: SpacetimeField, roll_off: float = DEFAULT_ROLL_OFF) -> SpacetimeField:
    """The path multiplied by the projection window, for like-for-like norms."""
    window = temporal_taper(u.sample_count, roll_off)
    return u.with_frames(window.reshape((-1,) + (1,) * (u.frames.ndim - 1)) * u.frames)
