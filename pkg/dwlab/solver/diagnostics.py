from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from dwlab.angular.projections import apply_omega_weight
from dwlab.angular.shells import ShellAnalysis
from dwlab.common.log import get_logger
from dwlab.dirac.projector import apply_projector, build_projector
from dwlab.grid.fields import SpacetimeField
from dwlab.grid.io import save_snapshot
from dwlab.nonlinear.potentials import inverse_derivative_symbol
from dwlab.propagator.duhamel import equation_residual
from dwlab.propagator.evolution import WaveDataPair, evolve
from dwlab.solver.config import PicardConfig
from dwlab.solver.systems import SIGNS, Solution, system_forcing

logger = get_logger(__name__)

Forcing = Callable[[Solution], Dict[int, SpacetimeField]]


def residual_check(solution: Solution, cfg: PicardConfig, forcing: Optional[Forcing] = None) -> float:
    """
    ``max_theta sup_k ||(-i d_t + theta h(D)) u_theta - F_theta||_{L^2}`` over interior frames.

    ``forcing`` maps the solution to ``{theta: F_theta}``; by default it is the
    system right-hand side evaluated on the solution.
    """
    if solution.sample_count < 3:
        raise ValueError(f"Residuals need at least 3 frames, got {solution.sample_count}")
    forces = forcing(solution) if forcing is not None else system_forcing(solution.components, cfg)
    return max(
        equation_residual(solution.component(theta), forces[theta], solution.law, theta)
        for theta in SIGNS
    )


def scattering_profiles(solution: Solution, theta: int, sample_times: Sequence[float]) -> List:
    """``f_T = e^{+theta i T h(D)} u_theta(T)`` at the frames nearest ``sample_times``."""
    window = float(solution.times[-1])
    profiles = []
    for t in sample_times:
        if not 0.0 <= t <= window + 1e-12:
            raise ValueError(f"Sample time {t} lies outside the window [0, {window:g}]")
        k = int(round(t / solution.time_step))
        actual = float(solution.times[k])
        profiles.append(evolve(solution.component(theta).frame(k), solution.law, -theta, actual))
    return profiles


def scattering_diagnostic(
    solution: Solution,
    sample_times: Optional[Sequence[float]] = None,
    theta: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Cauchy differences ``||f_{T_{k+1}} - f_{T_k}||_{L^2}`` of the scattering
    profiles, per sign and combined over the signs.

    ``sample_times`` defaults to ``T/4, T/2, 3T/4, T``.
    """
    window = float(solution.times[-1])
    if sample_times is None:
        sample_times = [window * k / 4.0 for k in range(1, 5)]
    sample_times = [float(t) for t in sample_times]
    signs = SIGNS if theta is None else (theta,)
    per_sign = {}
    for sign in signs:
        profiles = scattering_profiles(solution, sign, sample_times)
        per_sign[sign] = [(b - a).l2_norm() for a, b in zip(profiles, profiles[1:])]
    combined = np.sqrt(np.sum([np.square(per_sign[s]) for s in signs], axis=0)).tolist()
    factors = [a / b if b > 0 else None for a, b in zip(combined, combined[1:])]
    return {
        "times": sample_times,
        "differences": {f"{s:+d}": per_sign[s] for s in signs},
        "combined": combined,
        "decay_factors": factors,
        "decreasing": all(b <= a for a, b in zip(combined, combined[1:])),
    }


def wave_data_norm(data: WaveDataPair, sigma: float = 1.0, analysis: Optional[ShellAnalysis] = None) -> float:
    """``(||<Omega>^sigma u||_{H^{1/2}}^2 + ||<Omega>^sigma d_t u||_{H^{-1/2}}^2)^{1/2}``, homogeneous."""
    u0, u1 = data
    grid = u0.grid
    weighted_u0 = apply_omega_weight(u0, sigma, analysis)
    weighted_u1 = apply_omega_weight(u1, sigma, analysis)
    first = weighted_u0.apply_symbol(np.sqrt(grid.frequency_norm)).l2_norm()
    second = weighted_u1.apply_symbol(inverse_derivative_symbol(grid, 0.5)).l2_norm()
    return float(np.hypot(first, second))


def charge_drift(solution: Solution) -> float:
    """``max_t | ||u(t)|| - ||u(0)|| | / ||u(0)||``; 0 for zero data."""
    norms = np.asarray(solution.total.frame_norms())
    if norms[0] == 0.0:
        return 0.0
    return float(np.max(np.abs(norms - norms[0])) / norms[0])


def projector_leakage(solution: Solution, mass: float) -> float:
    """``max_{theta, t} ||Pi_{-theta} psi_theta(t)|| / ||psi(0)||``."""
    reference = solution.frame(0).l2_norm()
    if reference == 0.0:
        return 0.0
    worst = 0.0
    for theta in SIGNS:
        opposite = build_projector(solution.grid, mass, -theta)
        for frame in solution.component(theta):
            worst = max(worst, apply_projector(frame, opposite).l2_norm())
    return worst / reference


def write_snapshots(solution: Solution, directory: str, name: str, stride: int) -> List[str]:
    """Dump ``u(t_k)`` for every ``stride``-th frame in the binary snapshot format."""
    if stride <= 0:
        return []
    directory = Path(directory)
    paths = []
    for k in range(0, solution.sample_count, stride):
        path = save_snapshot(solution.frame(k), directory / f"{name}_{k:05d}.dwl")
        paths.append(str(path))
    logger.info(f"{len(paths)} snapshots written to {directory}")
    return paths
