from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign
from dwlab.grid.fields import Domain, FieldType, SpacetimeField, field_class
from dwlab.grid.transforms import fft_forward
from dwlab.propagator.dispersion import WAVE, DispersionLaw, LawKind

logger = get_logger(__name__)

Sign = Union[int, str]

ZERO_MODE_TOLERANCE = 1e-10


def propagator_symbol(f: FieldType, law: DispersionLaw, theta: Sign, t: float) -> np.ndarray:
    return np.exp(-1j * coerce_sign(theta) * t * law.symbol(f.grid))


def evolve(f: FieldType, law: DispersionLaw = WAVE, theta: Sign = 1, t: float = 0.0) -> FieldType:
    """
    Free half-wave flow ``e^{-theta i t h(D)} f``.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space data.
        law (:obj:`DispersionLaw`): ``|xi|`` or ``<xi>_m``.
        theta (:obj:`int` or :obj:`str`): propagation sign.
        t (:obj:`float`): time, any sign.
    """
    if t == 0.0:
        return f.with_values(f.values)
    return f.apply_symbol(propagator_symbol(f, law, theta, t))


def uniform_step(times: Sequence[float]) -> float:
    """The common spacing of ``times``, which must start at 0."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError(f"Need at least 2 sample times, got {times.size}")
    if times[0] != 0.0:
        raise ValueError(f"Sample times must start at 0, got {times[0]}")
    steps = np.diff(times)
    if not np.all(steps > 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("Sample times must be uniformly spaced and increasing")
    return float(steps[0])


def evolve_path(
    f: FieldType,
    law: DispersionLaw = WAVE,
    theta: Sign = 1,
    times: Sequence[float] = (0.0, 1.0),
) -> SpacetimeField:
    """Frames ``e^{-theta i t h(D)} f`` at uniformly spaced ``times``."""
    dt = uniform_step(times)
    h = law.symbol(f.grid)
    sign = coerce_sign(theta)
    spectrum = f.spectrum()
    cls = field_class(f.components)
    frames = [
        cls.from_spectrum(f.grid, spectrum * np.exp(-1j * sign * t * h)).values for t in times
    ]
    return SpacetimeField(grid=f.grid, time_step=dt, frames=np.stack(frames), components=f.components)


@dataclass(frozen=True, eq=False)
class WaveDataPair:
    """Cauchy data ``(u, d_t u)`` at ``t = 0``."""

    position: FieldType
    velocity: FieldType

    def __post_init__(self):
        self.position.check_compatible(self.velocity)
        self.position._require(Domain.PHYSICAL)

    @property
    def grid(self):
        return self.position.grid

    def __iter__(self):
        return iter((self.position, self.velocity))


def zero_mode_content(f: FieldType) -> float:
    """``|f^(0)|`` in the continuum normalisation (C^4 norm for spinors)."""
    f_hat = fft_forward(f).values
    return float(np.sqrt(np.sum(np.abs(f_hat[..., 0, 0, 0]) ** 2)))


def _inverse_symbol(grid, law: DispersionLaw) -> np.ndarray:
    h = law.symbol(grid)
    return np.divide(1.0, h, out=np.zeros_like(h), where=h > 0)


def halfwave_decompose(data: WaveDataPair, law: DispersionLaw = WAVE) -> Tuple[FieldType, FieldType]:
    """
    ``u_+- = (u -+ (i h(D))^{-1} d_t u) / 2`` so that ``u = u_+ + u_-`` with
    ``u_+-`` evolving under ``e^{-+ i t h(D)}``.

    For the wave law the ``xi = 0`` mode of ``d_t u`` is dropped; content above
    ``1e-10`` is logged as a warning.
    """
    u0, u1 = data
    if law.kind is LawKind.WAVE:
        zero_mode = zero_mode_content(u1)
        if zero_mode > ZERO_MODE_TOLERANCE:
            logger.warning(f"Zero mode {zero_mode:.2e} of d_t u removed before |D|^-1")
    inverse = _inverse_symbol(u0.grid, law)
    correction = u1.apply_symbol(inverse / 1j)
    return 0.5 * (u0 - correction), 0.5 * (u0 + correction)


def recompose(u_plus: FieldType, u_minus: FieldType, law: DispersionLaw = WAVE) -> WaveDataPair:
    """``(u_+ + u_-, -i h(D)(u_+ - u_-))``."""
    u_plus.check_compatible(u_minus)
    velocity = (u_plus - u_minus).apply_symbol(-1j * law.symbol(u_plus.grid))
    return WaveDataPair(u_plus + u_minus, velocity)


def wave_energy(data: WaveDataPair, law: DispersionLaw = WAVE) -> float:
    """``||h(D) u||^2 + ||d_t u||^2``."""
    u0, u1 = data
    return u0.apply_symbol(law.symbol(u0.grid)).l2_norm() ** 2 + u1.l2_norm() ** 2


def evolve_data(data: WaveDataPair, t: float, law: DispersionLaw = WAVE) -> WaveDataPair:
    """Flow of ``(d_tt + h(D)^2) u = 0`` through the half-wave split."""
    u_plus, u_minus = halfwave_decompose(data, law)
    return recompose(evolve(u_plus, law, 1, t), evolve(u_minus, law, -1, t), law)
