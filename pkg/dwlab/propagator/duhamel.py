from typing import Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign
from dwlab.grid.fields import SpacetimeField, spatial_fft, spatial_ifft
from dwlab.propagator.dispersion import WAVE, DispersionLaw

logger = get_logger(__name__)

Sign = Union[int, str]


def _phases(u: SpacetimeField, law: DispersionLaw, theta: Sign) -> np.ndarray:
    """``e^{theta i t_k h(xi)}`` per frame, shaped ``(K, M, M, M)``."""
    sign = coerce_sign(theta)
    h = law.symbol(u.grid)
    return np.exp(1j * sign * u.times[:, None, None, None] * h[None])


def _broadcast(phases: np.ndarray, components: int) -> np.ndarray:
    return phases if components == 1 else phases[:, None]


def twisted_spectrum(u: SpacetimeField, law: DispersionLaw = WAVE, theta: Sign = 1) -> np.ndarray:
    """Interaction-picture spectrum ``e^{theta i t h} u^(t)`` per frame (unscaled DFT)."""
    return _broadcast(_phases(u, law, theta), u.components) * spatial_fft(u.frames)


def duhamel(F: SpacetimeField, law: DispersionLaw = WAVE, theta: Sign = 1) -> SpacetimeField:
    """
    ``int_0^t e^{-theta i (t - t') h(D)} F(t') dt'`` at the frame times of ``F``.

    The integrand is transformed to the interaction picture, where it is
    integrated with the cumulative trapezoid rule and mapped back. Forcing
    that is itself a free wave is therefore integrated exactly.

    Args:
        F (:obj:`SpacetimeField`): at least three frames.
        law (:obj:`DispersionLaw`): wave or Klein-Gordon.
        theta (:obj:`int` or :obj:`str`): propagation sign.
    """
    if F.sample_count < 3:
        raise ValueError(f"Duhamel integrals need K >= 3 frames, got {F.sample_count}")
    phases = _broadcast(_phases(F, law, theta), F.components)
    twisted = phases * spatial_fft(F.frames)
    integral = cumulative_trapezoid(twisted, dx=F.time_step, axis=0, initial=0)
    return F.with_frames(spatial_ifft(integral / phases))


def duhamel_solution(F: SpacetimeField, law: DispersionLaw = WAVE, theta: Sign = 1) -> SpacetimeField:
    """``v = i * duhamel(F)``, the solution of ``(-i d_t + theta h(D)) v = F`` with ``v(0) = 0``."""
    return duhamel(F, law, theta) * 1j


def equation_residual(
    v: SpacetimeField,
    F: SpacetimeField,
    law: DispersionLaw = WAVE,
    theta: Sign = 1,
) -> float:
    """
    ``max_k ||(-i d_t + theta h(D)) v - F||_{L^2}`` over interior frames.

    In the interaction picture ``w = e^{theta i t h} v`` the operator becomes
    ``-i e^{-theta i t h} d_t w``; ``d_t w`` is taken by centred differences.
    """
    v.check_compatible(F)
    if v.sample_count < 3:
        raise ValueError(f"Residuals need K >= 3 frames, got {v.sample_count}")
    phases = _broadcast(_phases(v, law, theta), v.components)
    w = phases * spatial_fft(v.frames)
    dw = (w[2:] - w[:-2]) / (2.0 * v.time_step)
    applied = spatial_ifft(-1j * dw / phases[1:-1])
    residual = SpacetimeField(
        grid=v.grid,
        time_step=v.time_step,
        frames=applied - F.frames[1:-1],
        components=v.components,
    )
    worst = max(residual.frame_norms())
    logger.debug(f"Equation residual {worst:.3e} at dt={v.time_step:g}")
    return worst
