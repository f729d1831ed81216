import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft as sfft

from dwlab.angular.projections import Scale
from dwlab.angular.shells import ShellAnalysis, shell_analysis
from dwlab.angular.spectrum import AngularSpectrum
from dwlab.angular.synthesis import (
    concentration_witness,
    random_localized_spectrum,
    synthesize_spectral,
    synthesize_spinor,
)
from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign, fft_workers
from dwlab.dirac.projector import apply_projector, build_projector
from dwlab.grid.fields import ScalarField, SpacetimeField, SpinorField
from dwlab.grid.norms import lebesgue_norm, mixed_norm, mixed_norm_from_frame_norms, trapezoid_weights
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.caps import CapCollection, angular_resolution_warning
from dwlab.multiplier.cubes import Cube, CubeCollection
from dwlab.multiplier.littlewood_paley import annulus_symbol, check_annulus_resolution
from dwlab.multiplier.modulation import check_modulation_resolution, project_modulation, temporal_frequencies
from dwlab.nonlinear.null_forms import NullFormKind, free_time_derivative, null_form
from dwlab.nonlinear.potentials import inverse_derivative_symbol
from dwlab.nonlinear.rhs import spinor_pairing
from dwlab.normbench.report import ProbeReport
from dwlab.normbench.variation import twisted_path, v2_norm
from dwlab.propagator.dispersion import WAVE, DispersionLaw
from dwlab.propagator.evolution import evolve, evolve_path, zero_mode_content
from dwlab.propagator.probes import default_time_step, sample_times, strichartz_exponent

logger = get_logger(__name__)

HIGH_MODULATION_ESTIMATE = "||C^theta_d u||_{L^q_t L^2_x} <~ d^{-1/q} ||u||_{V^2_theta}"
BILINEAR_ESTIMATE = (
    "||P_lambda0 (phi^dagger_{lambda1,N1} psi_{lambda2,N2})||_{L^2_t L^2_x} "
    "<~ lambda0 (min/max)^delta min(N1,N2)^{1-eta} ||phi|| ||psi||"
)
TRILINEAR_ESTIMATE = (
    "|int w_{mu,N} |D|^{-2} Q(u_bar, v)| "
    "<~ min(lambda1,lambda2)^{1/2} (min/max)^delta min(N1,N2)^{1-eta} ||w|| ||u|| ||v||"
)
CHAINED_ESTIMATE = (
    "||P_q R_kappa P_lambda H_N u||_{L^2_t L^inf_x} "
    "<~ mu^{3/q} alpha^{2/q} (alpha N)^{1/2-2/q} lambda^{1-3/q} N^{1/2+eta} ||f||"
)

# C_{<<d} is the cumulative projection at d / MUCH_SMALLER_FACTOR
MUCH_SMALLER_FACTOR = 4
REGIMES = ("low_output", "high_output", "high_modulation")


def check_trichotomy(*scales: Scale) -> List[float]:
    """
    Sorted scale values; the two largest must be comparable (``mid >= max / 4``).
    """
    values = sorted(DyadicScale.of(s).value for s in scales)
    if len(values) != 3:
        raise ValueError(f"Need three scales, got {len(values)}")
    if values[1] < values[2] / 4.0:
        raise ValueError(
            f"Scales {values} are not trichotomy-compatible: the two largest must be comparable"
        )
    return values


def modulation_regime(mu: float, lam1: float, lam2: float, d: float) -> str:
    """Which of :data:`REGIMES` a block ``(mu, lam1, lam2)`` at modulation ``d`` falls into."""
    if d >= min(mu, lam1, lam2):
        return "high_modulation"
    if mu <= max(lam1, lam2) / MUCH_SMALLER_FACTOR:
        return "low_output"
    return "high_output"


def modulation_cap_radius(regime: str, d: float, mu: float, lam: float) -> float:
    """
    Cap radius attached to one modulation block, clipped to ``(0, 1]``.

    ``low_output``: ``(d mu / lam^2)^{1/2}``; ``high_output``: ``(d / lam)^{1/2}``
    with ``lam`` the lower input scale; ``high_modulation``: ``mu / lam``.
    """
    if not (d > 0 and mu > 0 and lam > 0):
        raise ValueError(f"d, mu and lambda must be positive, got {d}, {mu}, {lam}")
    match regime:
        case "low_output":
            radius = math.sqrt(d * mu) / lam
        case "high_output":
            radius = math.sqrt(d / lam)
        case "high_modulation":
            radius = mu / lam
        case _:
            raise ValueError(f"Unknown regime {regime!r}, expected one of {REGIMES}")
    return float(min(radius, 1.0))


def _environment(grid: GridSpec, bump: BumpFunction, seed: int) -> Dict:
    return {"grid": grid.to_dict(), "bump": bump.identifier, "seed": seed}


def _scalar_inputs(
    grid: GridSpec,
    scale: float,
    N: float,
    rng: np.random.Generator,
    trials: int,
    analysis: ShellAnalysis,
    max_degree: int,
    bump: BumpFunction,
) -> List[ScalarField]:
    """The zonal witness followed by ``trials`` random ``P_lambda H_N`` fields."""
    spectra = [concentration_witness(scale, N, max_degree, bump)]
    spectra += [random_localized_spectrum(scale, N, rng, max_degree, bump) for _ in range(trials)]
    return [synthesize_spectral(s, grid, analysis) for s in spectra]


def _spinor_inputs(
    grid: GridSpec,
    scale: float,
    N: float,
    theta: int,
    mass: float,
    rng: np.random.Generator,
    trials: int,
    analysis: ShellAnalysis,
    max_degree: int,
    bump: BumpFunction,
) -> List[SpinorField]:
    """``Pi_theta`` of a witness spinor (zonal first component) and of random spinors."""
    projector = build_projector(grid, mass, theta)
    empty = AngularSpectrum(max_degree=max_degree)
    spectra = [[concentration_witness(scale, N, max_degree, bump), empty, empty, empty]]
    for _ in range(trials):
        spectra.append([random_localized_spectrum(scale, N, rng, max_degree, bump) for _ in range(4)])
    return [apply_projector(synthesize_spinor(s, grid, analysis), projector) for s in spectra]


def one_jump_path(
    f: ScalarField,
    g: ScalarField,
    times: Sequence[float],
    law: DispersionLaw = WAVE,
    theta: Union[int, str] = 1,
) -> SpacetimeField:
    """Free wave of ``f`` that switches to the free wave of ``g`` at the middle sample."""
    first = evolve_path(f, law, theta, times)
    second = evolve_path(g, law, theta, times)
    half = first.sample_count // 2
    return first.with_frames(np.concatenate([first.frames[:half], second.frames[half:]]))


def _high_modulation_ratio(
    path: SpacetimeField,
    d: float,
    q: float,
    theta: int,
    law: DispersionLaw,
    bump: BumpFunction,
    norm: float,
) -> Tuple[float, float]:
    projected, leakage = project_modulation(path, d, theta, law, bump=bump)
    return mixed_norm(projected, q, 2.0) * d ** (1.0 / q) / norm, leakage


def high_modulation_probe(
    grid: GridSpec,
    scale: Scale = 2.0,
    d_multiples: Sequence[float] = (4.0, 8.0, 16.0),
    q: float = 2.0,
    window: float = 8.0,
    time_step: Optional[float] = None,
    theta: Union[int, str] = 1,
    law: DispersionLaw = WAVE,
    trials: int = 2,
    seed: int = 0,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    paths: Optional[Sequence[SpacetimeField]] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> ProbeReport:
    """
    High-modulation ratio ``||C^theta_d u||_{L^q_t L^2_x} d^{1/q} / ||e^{theta i t h} u||_{V^2}``
    over ``d = m * 2 pi / T`` for ``m`` in ``d_multiples``.

    The paths are one-jump superpositions of free waves of random
    ``P_lambda`` data unless ``paths`` are given. A zero path is a skipped
    trial. The ratio of a pure free wave, which only sees window leakage, is
    kept in ``extras["free_wave_ratio"]``.
    """
    theta = coerce_sign(theta)
    if not 2.0 <= q < math.inf:
        raise ValueError(f"q must lie in [2, inf), got {q}")
    lam = DyadicScale.of(scale).value
    if paths is None:
        dt = time_step if time_step is not None else default_time_step(lam, window)
        times = sample_times(window, dt)
    else:
        times = paths[0].times
    span = float(times[-1])
    ds = [m * 2.0 * math.pi / span for m in d_multiples]

    report = ProbeReport(
        name="high_modulation",
        estimate=HIGH_MODULATION_ESTIMATE,
        params={
            "lambda": lam,
            "q": q,
            "theta": theta,
            "window": span,
            "time_step": float(times[1] - times[0]),
            "d_multiples": [float(m) for m in d_multiples],
            "law": law.name,
            "trials": trials,
        },
        environment=_environment(grid, bump, seed),
    )

    if paths is None:
        for message in check_annulus_resolution(grid, lam):
            report.warn(message)
        analysis = analysis or shell_analysis(grid, max_degree)
        rng = np.random.default_rng(seed)
        fields = _scalar_inputs(grid, lam, 1.0, rng, 2 * trials, analysis, max_degree, bump)
        free = evolve_path(fields[0], law, theta, times)
        free_norm = v2_norm(twisted_path(free, law, theta))
        if free_norm > 0:
            report.extras["free_wave_ratio"] = max(
                _high_modulation_ratio(free, d, q, theta, law, bump, free_norm)[0] for d in ds
            )
        randoms = fields[1:]
        paths = [one_jump_path(f, g, times, law, theta) for f, g in zip(randoms[0::2], randoms[1::2])]

    best = {d: 0.0 for d in ds}
    leakage = {}
    used = 0
    for path in paths:
        norm = v2_norm(twisted_path(path, law, theta))
        if norm == 0.0:
            report.skipped += 1
            continue
        used += 1
        for d in ds:
            ratio, leakage[d] = _high_modulation_ratio(path, d, q, theta, law, bump, norm)
            best[d] = max(best[d], ratio)
    if used == 0:
        report.warn("every path vanishes; nothing to measure")
        return report

    for d in ds:
        report.add_sample(best[d], d=d)
    report.extras["leakage"] = {f"{d:.6g}": leak for d, leak in leakage.items()}
    if np.all(report.values() > 0):
        report.fit("d")
    return report


def bilinear_probe(
    grid: GridSpec,
    scale0: Scale,
    scale1: Scale,
    scale2: Scale,
    N1: Scale = 1.0,
    N2: Scale = 1.0,
    theta1: Union[int, str] = 1,
    theta2: Union[int, str] = 1,
    mass: float = 1.0,
    eta: float = 0.1,
    window: float = 4.0,
    time_step: Optional[float] = None,
    trials: int = 2,
    seed: int = 0,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
    pairs: Optional[Sequence[Tuple[SpinorField, SpinorField]]] = None,
) -> ProbeReport:
    """
    ``||P_lambda0 (phi^dagger psi)||_{L^2_t L^2_x} / (lambda0 ||phi(0)|| ||psi(0)||)``
    for free Klein-Gordon spinor waves ``phi = e^{-theta1 i t <D>} Pi_theta1 f`` and
    ``psi = e^{-theta2 i t <D>} Pi_theta2 g`` of ``(lambda, N)``-localised data.

    The sample is the maximum over a witness pair and ``trials`` random pairs,
    or over the explicit ``pairs`` of initial spinors used as given. It is keyed
    by ``ratio = min / max`` of the three scales and ``N_min``; divided by
    ``N_min^{1 - eta}`` it is ``extras["normalized"]``. The time integral is
    accumulated frame by frame.
    """
    check_trichotomy(scale0, scale1, scale2)
    lam0, lam1, lam2 = (DyadicScale.of(s).value for s in (scale0, scale1, scale2))
    n1, n2 = DyadicScale.of(N1).value, DyadicScale.of(N2).value
    theta1, theta2 = coerce_sign(theta1), coerce_sign(theta2)
    law = DispersionLaw.klein_gordon(mass)
    dt = time_step if time_step is not None else default_time_step(max(lam0, lam1, lam2), window)
    times = sample_times(window, dt)
    scales = (lam0, lam1, lam2)
    ratio = min(scales) / max(scales)
    n_min = min(n1, n2)

    report = ProbeReport(
        name="bilinear",
        estimate=BILINEAR_ESTIMATE,
        params={
            "lambda0": lam0,
            "lambda1": lam1,
            "lambda2": lam2,
            "N1": n1,
            "N2": n2,
            "theta1": theta1,
            "theta2": theta2,
            "mass": mass,
            "eta": eta,
            "window": float(times[-1]),
            "time_step": dt,
            "trials": trials,
        },
        environment=_environment(grid, bump, seed),
    )
    for lam in {lam1, lam2}:
        for message in check_annulus_resolution(grid, lam):
            report.warn(message)

    if pairs is None:
        analysis = analysis or shell_analysis(grid, max_degree)
        rng = np.random.default_rng(seed)
        firsts = _spinor_inputs(grid, lam1, n1, theta1, mass, rng, trials, analysis, max_degree, bump)
        seconds = _spinor_inputs(grid, lam2, n2, theta2, mass, rng, trials, analysis, max_degree, bump)
        pairs = list(zip(firsts, seconds))
    output_symbol = annulus_symbol(grid, lam0, bump)

    best, best_input = 0.0, None
    for k, (phi, psi) in enumerate(pairs):
        denominator = lam0 * phi.l2_norm() * psi.l2_norm()
        if denominator == 0.0:
            report.skipped += 1
            continue
        frame_norms = [
            spinor_pairing(evolve(phi, law, theta1, t), evolve(psi, law, theta2, t))
            .apply_symbol(output_symbol)
            .l2_norm()
            for t in times
        ]
        value = mixed_norm_from_frame_norms(frame_norms, dt, 2.0) / denominator
        if value > best:
            best, best_input = value, "witness" if k == 0 else f"random-{k}"

    report.add_sample(best, ratio=ratio, N_min=n_min, lambda0=lam0, lambda1=lam1, lambda2=lam2)
    report.extras["normalized"] = best / n_min ** (1.0 - eta)
    report.extras["input"] = best_input
    return report


def _time_derivative(path: SpacetimeField) -> SpacetimeField:
    """Spectral ``d_t`` along the sample axis; meant for tapered or projected paths."""
    tau = temporal_frequencies(path.sample_count, path.time_step)
    tau = tau.reshape((-1,) + (1,) * (path.frames.ndim - 1))
    spectrum = sfft.fft(path.frames, axis=0, workers=fft_workers())
    return path.with_frames(sfft.ifft(1j * tau * spectrum, axis=0, workers=fft_workers()))


def trilinear_integrand(
    w: ScalarField,
    a: ScalarField,
    b: ScalarField,
    kind: Union[str, NullFormKind],
    a_t: Optional[ScalarField] = None,
    b_t: Optional[ScalarField] = None,
) -> complex:
    """``int w |D|^{-2} Q(a, b) dx`` at one time; the zero mode of ``Q`` is dropped."""
    w.check_compatible(a)
    q = null_form(a, b, kind, a_t, b_t)
    g = q.apply_symbol(inverse_derivative_symbol(q.grid, 2.0))
    return complex(np.sum(w.values * g.values) * w.grid.cell_volume)


def trilinear_form(
    w: SpacetimeField,
    a: SpacetimeField,
    b: SpacetimeField,
    kind: Union[str, NullFormKind],
    a_t: Optional[SpacetimeField] = None,
    b_t: Optional[SpacetimeField] = None,
) -> complex:
    """``int int w |D|^{-2} Q(a, b) dx dt`` with the trapezoid rule in time."""
    w.check_compatible(a)
    w.check_compatible(b)
    kind = NullFormKind.parse(kind)
    weights = trapezoid_weights(w.sample_count, w.time_step)
    total = 0j
    for k in range(w.sample_count):
        total += weights[k] * trilinear_integrand(
            w.frame(k),
            a.frame(k),
            b.frame(k),
            kind,
            a_t.frame(k) if a_t is not None else None,
            b_t.frame(k) if b_t is not None else None,
        )
    return complex(total)


def _free_factors(
    fields: Sequence[ScalarField],
    thetas: Sequence[int],
    law: DispersionLaw,
    t: float,
):
    """Frames ``w(t)``, ``u_bar(t)``, ``v(t)`` with their exact time derivatives."""
    w0, u0, v0 = fields
    theta0, theta1, theta2 = thetas
    w = evolve(w0, law, theta0, t)
    u = evolve(u0, law, theta1, t)
    v = evolve(v0, law, theta2, t)
    # u_bar is a free wave of sign -theta1
    u_bar = u.conj()
    return w, u_bar, v, free_time_derivative(u_bar, law, -theta1), free_time_derivative(v, law, theta2)


def modulation_split(
    fields: Sequence[ScalarField],
    thetas: Sequence[int],
    times: Sequence[float],
    d: float,
    kind: NullFormKind,
    law: DispersionLaw = WAVE,
    bump: BumpFunction = DEFAULT_BUMP,
) -> Dict[str, float]:
    """
    The three modulation pieces of the trilinear form of free waves at one ``d``:

    * ``I0``: ``C_d w``, ``C_{<<d} u_bar``, ``C_{<<d} v``
    * ``I1``: ``C_{<=d} w``, ``C_d u_bar``, ``C_{<=d} v``
    * ``I2``: ``C_{<=d} w``, ``C_{<=d} u_bar``, ``C_d v``

    ``C_{<<d}`` is ``C_{<=d/4}``. Each projection acts on the tapered path.
    """
    w0, u0, v0 = fields
    theta0, theta1, theta2 = thetas
    w_path = evolve_path(w0, law, theta0, times)
    u_bar_path = evolve_path(u0, law, theta1, times)
    u_bar_path = u_bar_path.with_frames(np.conj(u_bar_path.frames))
    v_path = evolve_path(v0, law, theta2, times)
    signs = {"w": theta0, "u": -theta1, "v": theta2}
    paths = {"w": w_path, "u": u_bar_path, "v": v_path}

    def project(name: str, size: float, cumulative: bool) -> SpacetimeField:
        projected, _ = project_modulation(paths[name], size, signs[name], law, cumulative, bump)
        return projected

    small = d / MUCH_SMALLER_FACTOR
    layouts = {
        "I0": (project("w", d, False), project("u", small, True), project("v", small, True)),
        "I1": (project("w", d, True), project("u", d, False), project("v", d, True)),
        "I2": (project("w", d, True), project("u", d, True), project("v", d, False)),
    }
    pieces = {}
    for name, (w, a, b) in layouts.items():
        if kind.is_q0:
            value = trilinear_form(w, a, b, kind, _time_derivative(a), _time_derivative(b))
        else:
            value = trilinear_form(w, a, b, kind)
        pieces[name] = abs(value)
    return pieces


def trilinear_probe(
    grid: GridSpec,
    scale0: Scale,
    scale1: Scale,
    scale2: Scale,
    N0: Scale = 1.0,
    N1: Scale = 1.0,
    N2: Scale = 1.0,
    theta0: Union[int, str] = 1,
    theta1: Union[int, str] = 1,
    theta2: Union[int, str] = 1,
    kind: Union[str, NullFormKind] = "Q12",
    law: DispersionLaw = WAVE,
    eta: float = 0.1,
    window: float = 4.0,
    time_step: Optional[float] = None,
    modulation: Optional[float] = None,
    trials: int = 2,
    seed: int = 0,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
    triples: Optional[Sequence[Tuple[ScalarField, ScalarField, ScalarField]]] = None,
) -> ProbeReport:
    """
    Trilinear ratio ``|int int w |D|^{-2} Q(u_bar, v)| / (min(lambda1, lambda2)^{1/2} ||w|| ||u|| ||v||)``
    for free waves of ``(mu, N0)``, ``(lambda1, N1)`` and ``(lambda2, N2)``-localised data.

    Besides the sample (maximum over the witness triple and ``trials`` random
    triples, or over explicit initial ``triples`` ``(w, u, v)``) the report carries:

    * ``extras["antisymmetry_witness"]``: for ``Q_ij``, the form with both
      null-form slots equal to ``v``, which vanishes identically;
    * ``extras["modulation_split"]`` when ``modulation`` is set: the pieces
      ``I0``, ``I1``, ``I2`` of the witness triple at that ``d``, normalised
      like the sample, with the regime and cap radius of the block.
    """
    check_trichotomy(scale0, scale1, scale2)
    mu, lam1, lam2 = (DyadicScale.of(s).value for s in (scale0, scale1, scale2))
    n0, n1, n2 = (DyadicScale.of(n).value for n in (N0, N1, N2))
    thetas = tuple(coerce_sign(t) for t in (theta0, theta1, theta2))
    kind = NullFormKind.parse(kind)
    dt = time_step if time_step is not None else default_time_step(max(mu, lam1, lam2), window)
    times = sample_times(window, dt)
    weights = trapezoid_weights(times.size, dt)
    if modulation is not None:
        # I0 projects at d / 4
        check_modulation_resolution(times.size, dt, float(modulation) / MUCH_SMALLER_FACTOR)
    scales = (mu, lam1, lam2)
    ratio = min(scales) / max(scales)
    n_min = min(n1, n2)

    report = ProbeReport(
        name="trilinear",
        estimate=TRILINEAR_ESTIMATE,
        params={
            "mu": mu,
            "lambda1": lam1,
            "lambda2": lam2,
            "N": n0,
            "N1": n1,
            "N2": n2,
            "thetas": list(thetas),
            "kind": kind.name,
            "law": law.name,
            "eta": eta,
            "window": float(times[-1]),
            "time_step": dt,
            "modulation": modulation,
            "trials": trials,
        },
        environment=_environment(grid, bump, seed),
    )
    for lam in set(scales):
        for message in check_annulus_resolution(grid, lam):
            report.warn(message)

    if triples is None:
        analysis = analysis or shell_analysis(grid, max_degree)
        rng = np.random.default_rng(seed)
        triples = zip(
            _scalar_inputs(grid, mu, n0, rng, trials, analysis, max_degree, bump),
            _scalar_inputs(grid, lam1, n1, rng, trials, analysis, max_degree, bump),
            _scalar_inputs(grid, lam2, n2, rng, trials, analysis, max_degree, bump),
        )
    inputs = [tuple(triple) for triple in triples]

    best, best_input = 0.0, None
    witness, removed = 0j, 0.0
    for k, fields in enumerate(inputs):
        denominator = math.sqrt(min(lam1, lam2)) * math.prod(f.l2_norm() for f in fields)
        if denominator == 0.0:
            report.skipped += 1
            continue
        total = 0j
        for weight, t in zip(weights, times):
            w, u_bar, v, u_bar_t, v_t = _free_factors(fields, thetas, law, float(t))
            if kind.is_q0:
                total += weight * trilinear_integrand(w, u_bar, v, kind, u_bar_t, v_t)
            else:
                total += weight * trilinear_integrand(w, u_bar, v, kind)
            if k == 0:
                if not kind.is_q0:
                    witness += weight * trilinear_integrand(w, v, v, kind)
                removed = max(removed, zero_mode_content(null_form(u_bar, v, kind, u_bar_t, v_t)))
        value = abs(total) / denominator
        if value > best:
            best, best_input = value, "witness" if k == 0 else f"random-{k}"

    report.add_sample(best, ratio=ratio, N_min=n_min, mu=mu, lambda1=lam1, lambda2=lam2)
    report.extras["normalized"] = best / n_min ** (1.0 - eta)
    report.extras["input"] = best_input
    report.extras["antisymmetry_witness"] = None if kind.is_q0 else abs(witness)
    report.extras["zero_mode_removed"] = removed

    if modulation is not None:
        d = float(modulation)
        regime = modulation_regime(mu, lam1, lam2, d)
        match regime:
            case "low_output":
                radius = modulation_cap_radius(regime, d, mu, max(lam1, lam2))
            case "high_output":
                radius = modulation_cap_radius(regime, d, mu, min(lam1, lam2))
            case _:
                radius = modulation_cap_radius(regime, d, min(scales), max(scales))
        denominator = math.sqrt(min(lam1, lam2)) * math.prod(f.l2_norm() for f in inputs[0])
        pieces = modulation_split(inputs[0], thetas, times, d, kind, law, bump)
        report.extras["modulation_split"] = {
            "d": d,
            "regime": regime,
            "cap_radius": radius,
            **{name: value / denominator for name, value in pieces.items()},
        }
    return report


def chained_probe(
    grid: GridSpec,
    scale: Scale,
    N: Scale,
    mu: Scale,
    alpha: float,
    eta: float = 0.1,
    window: float = 4.0,
    time_step: Optional[float] = None,
    theta: Union[int, str] = 1,
    law: DispersionLaw = WAVE,
    direction: Sequence[float] = (0.0, 0.0, 1.0),
    trials: int = 2,
    seed: int = 0,
    max_degree: int = 16,
    analysis: Optional[ShellAnalysis] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> ProbeReport:
    """
    ``||P_q R_kappa e^{theta i t h(D)} P_lambda H_N f||_{L^2_t L^inf_x} / ||f||``
    with the cap ``kappa`` nearest ``direction`` and the ``mu``-cube ``q``
    containing ``lambda`` times the cap centre.

    The raw ratio is the sample; divided by
    ``mu^{3/q} alpha^{2/q} (alpha N)^{1/2-2/q} lambda^{1-3/q} N^{1/2+eta}``
    (``q = q_eta``) it is ``extras["normalized"]``.
    """
    theta = coerce_sign(theta)
    lam = DyadicScale.of(scale).value
    n_value = DyadicScale.of(N).value
    mu_value = DyadicScale.of(mu).value
    q = strichartz_exponent(eta)
    dt = time_step if time_step is not None else default_time_step(lam, window)
    times = sample_times(window, dt)

    report = ProbeReport(
        name="chained",
        estimate=CHAINED_ESTIMATE,
        params={
            "lambda": lam,
            "N": n_value,
            "mu": mu_value,
            "alpha": alpha,
            "eta": eta,
            "q": q,
            "window": float(times[-1]),
            "time_step": dt,
            "law": law.name,
            "trials": trials,
        },
        environment=_environment(grid, bump, seed),
    )
    for message in check_annulus_resolution(grid, lam):
        report.warn(message)
    message = angular_resolution_warning(grid, alpha, lam)
    if message:
        report.warn(message)

    caps = CapCollection(alpha)
    cap = caps.nearest(np.asarray(direction, dtype=float))
    cubes = CubeCollection(grid, mu_value)
    index = tuple(int(i) for i in np.round(lam * cap.center / cubes.spacing))
    if any(i not in cubes.axis_indices for i in index):
        raise ValueError(f"lambda={lam:g} along the cap centre leaves the frequency lattice")
    cube = Cube(index=index, spacing=cubes.spacing)
    symbol = caps.weight(cap, grid) * cubes.weight(cube)

    analysis = analysis or shell_analysis(grid, max_degree)
    rng = np.random.default_rng(seed)
    best = 0.0
    for f in _scalar_inputs(grid, lam, n_value, rng, trials, analysis, max_degree, bump):
        norm = f.l2_norm()
        if norm == 0.0:
            report.skipped += 1
            continue
        localized = f.apply_symbol(symbol)
        # the estimate is stated for e^{+theta i t h}
        frame_norms = [lebesgue_norm(evolve(localized, law, -theta, float(t)), np.inf) for t in times]
        best = max(best, mixed_norm_from_frame_norms(frame_norms, dt, 2.0) / norm)

    bound = (
        mu_value ** (3.0 / q)
        * alpha ** (2.0 / q)
        * (alpha * n_value) ** (0.5 - 2.0 / q)
        * lam ** (1.0 - 3.0 / q)
        * n_value ** (0.5 + eta)
    )
    report.add_sample(best, **{"lambda": lam, "N": n_value, "mu": mu_value, "alpha": alpha})
    report.extras["normalized"] = best / bound
    report.extras["cap"] = {"index": cap.index, "center": cap.center}
    report.extras["cube"] = list(index)
    return report
