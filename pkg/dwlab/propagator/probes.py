import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from dwlab.angular.projections import Scale
from dwlab.angular.shells import ShellAnalysis, shell_analysis
from dwlab.angular.synthesis import (
    concentration_witness,
    random_localized_spectrum,
    synthesize_spectral,
)
from dwlab.common.log import get_logger
from dwlab.grid.fields import FieldType
from dwlab.grid.norms import boundary_mass, lebesgue_norm, mixed_norm
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.littlewood_paley import check_annulus_resolution
from dwlab.normbench.report import ProbeReport
from dwlab.propagator.dispersion import WAVE, DispersionLaw
from dwlab.propagator.evolution import evolve, evolve_path

logger = get_logger(__name__)

STRICHARTZ_ESTIMATE = (
    "||e^{theta i t h(D)} P_lambda H_N f||_{L^2_t L^q_x} <~ lambda^{1-3/q} N^{1/2+eta} ||P_lambda H_N f||_2"
)
DECAY_ESTIMATE = "||e^{-i t |D|} P_1 f||_inf <~ t^{-1} ||P_1 f||_1"

# boundary mass above which an evolved field is considered to have reached the box faces
WAVEFRONT_THRESHOLD = 1e-8


def strichartz_exponent(eta: float) -> float:
    """``q_eta = 4 / (1 - eta)``."""
    if not 0 < eta <= 0.1:
        raise ValueError(f"eta must lie in (0, 1/10], got {eta}")
    return 4.0 / (1.0 - eta)


def default_time_step(scale: float, window: float) -> float:
    """``min(T / 32, 1 / (4 lambda))``: a few samples per period of the top frequency ``2 lambda``."""
    return min(window / 32.0, 1.0 / (4.0 * scale))


def sample_times(window: float, time_step: float) -> np.ndarray:
    """``0, dt, 2 dt, ...`` up to the first sample at or past ``window``."""
    if not window > 0 or not time_step > 0:
        raise ValueError(f"window and time_step must be positive, got {window} and {time_step}")
    count = int(math.ceil(window / time_step - 1e-9)) + 1
    return time_step * np.arange(count)


def strichartz_probe(
    grid: GridSpec,
    scale: Scale,
    N: Scale,
    eta: float = 0.1,
    window: float = 4.0,
    time_step: Optional[float] = None,
    trials: int = 2,
    seed: int = 0,
    theta: int = 1,
    law: DispersionLaw = WAVE,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
    fields: Optional[Sequence[FieldType]] = None,
) -> ProbeReport:
    """
    Angular Strichartz ratio ``||e^{theta i t h(D)} f||_{L^2_t L^{q_eta}_x} / ||f||_{L^2}``
    over spectrally synthesised ``f = P_lambda H_N g``.

    The inputs are the zonal concentration witness plus ``trials`` random
    spectra, unless ``fields`` are given explicitly. The sample is the raw
    maximum ratio; the ratio divided by ``lambda^{1-3/q} N^{1/2+eta}`` is kept
    in ``extras["normalized"]``.
    """
    lam = DyadicScale.of(scale).value
    n_value = DyadicScale.of(N).value
    q = strichartz_exponent(eta)
    if window < 8.0 / lam:
        raise ValueError(f"Window {window} is shorter than 8 / lambda = {8.0 / lam:g}")
    dt = time_step if time_step is not None else default_time_step(lam, window)
    times = sample_times(window, dt)

    report = ProbeReport(
        name="strichartz",
        estimate=STRICHARTZ_ESTIMATE,
        params={
            "lambda": lam,
            "N": n_value,
            "eta": eta,
            "q": q,
            "window": float(times[-1]),
            "time_step": dt,
            "law": law.name,
            "trials": trials,
        },
        environment={"grid": grid.to_dict(), "bump": bump.identifier, "seed": seed},
    )
    for message in check_annulus_resolution(grid, lam):
        report.warn(message)

    if fields is None:
        analysis = analysis or shell_analysis(grid, max_degree)
        rng = np.random.default_rng(seed)
        spectra = [concentration_witness(lam, n_value, max_degree, bump)]
        spectra += [random_localized_spectrum(lam, n_value, rng, max_degree, bump) for _ in range(trials)]
        fields = [synthesize_spectral(spectrum, grid, analysis) for spectrum in spectra]

    best = 0.0
    for f in fields:
        norm = f.l2_norm()
        if norm == 0.0:
            report.skipped += 1
            continue
        # the estimate is stated for e^{+theta i t h}
        path = evolve_path(f, law, -theta, times)
        best = max(best, mixed_norm(path, 2.0, q) / norm)

    report.add_sample(best, **{"lambda": lam, "N": n_value})
    report.extras["normalized"] = best / (lam ** (1.0 - 3.0 / q) * n_value ** (0.5 + eta))
    return report


def radial_halfwave_profile(
    profile: Callable[[float], float],
    t: float,
    r: float,
    k_max: float,
) -> complex:
    """
    ``(e^{-i t |D|} f)(r)`` for radial ``f`` with ``f^(xi) = profile(|xi|)`` supported in ``|xi| <= k_max``:

    ``(2 pi^2 r)^{-1} int_0^inf profile(k) e^{-i t k} sin(k r) k dk``, with the
    ``r = 0`` limit ``(2 pi^2)^{-1} int profile(k) e^{-i t k} k^2 dk``.
    """
    if r == 0.0:
        real, _ = quad(lambda k: profile(k) * k**2 * math.cos(t * k), 0.0, k_max, limit=400)
        imag, _ = quad(lambda k: -profile(k) * k**2 * math.sin(t * k), 0.0, k_max, limit=400)
        return complex(real, imag) / (2.0 * math.pi**2)
    real, _ = quad(lambda k: profile(k) * k * math.cos(t * k), 0.0, k_max, weight="sin", wvar=r, limit=400)
    imag, _ = quad(lambda k: -profile(k) * k * math.sin(t * k), 0.0, k_max, weight="sin", wvar=r, limit=400)
    return complex(real, imag) / (2.0 * math.pi**2 * r)


def radial_peak(
    profile: Callable[[float], float],
    t: float,
    radii: Sequence[float],
    k_max: float,
) -> float:
    """``max_r |(e^{-i t |D|} f)(r)|`` over ``radii`` by :func:`radial_halfwave_profile`."""
    return max(abs(radial_halfwave_profile(profile, t, float(r), k_max)) for r in radii)


def decay_probe(
    f: FieldType,
    times: Sequence[float] = (2.0, 4.0, 8.0, 16.0),
    law: DispersionLaw = WAVE,
    theta: int = 1,
) -> ProbeReport:
    """
    Dispersive decay of ``||e^{-theta i t h(D)} f||_{L^inf}`` over ``times``,
    fitted against ``t``.

    ``f`` is expected to be frequency-localised at unit scale and centred at
    ``x = 0``. Times beyond ``L / 2``, or frames with mass at the box faces,
    are flagged as wavefront warnings.
    """
    grid = f.grid
    report = ProbeReport(
        name="decay",
        estimate=DECAY_ESTIMATE,
        params={"times": [float(t) for t in times], "law": law.name},
        environment={"grid": grid.to_dict()},
    )
    report.extras["initial_sup"] = lebesgue_norm(f, np.inf)
    for t in times:
        if t > grid.half_period / 2.0:
            report.warn(f"t={t:g} exceeds L/2={grid.half_period / 2.0:g}; the wavefront nears the boundary")
        evolved = evolve(f, law, theta, float(t))
        mass = boundary_mass(evolved)
        if mass > WAVEFRONT_THRESHOLD:
            report.warn(f"t={t:g}: boundary mass {mass:.2e}, torus wrap-around likely")
        report.add_sample(lebesgue_norm(evolved, np.inf), t=float(t))
    if np.any(report.values() > 0):
        report.fit("t")
    else:
        report.skipped += len(report.samples)
        report.warn("all samples vanish; fit skipped")
    return report
