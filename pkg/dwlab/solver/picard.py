from typing import Optional, Tuple, Union

from dwlab.angular.projections import apply_omega_weight
from dwlab.angular.shells import ShellAnalysis
from dwlab.common.log import get_logger
from dwlab.grid.fields import SpinorField
from dwlab.propagator.duhamel import duhamel_solution
from dwlab.propagator.evolution import evolve_path, recompose
from dwlab.solver.config import PicardConfig, SolveReport
from dwlab.solver.diagnostics import (
    charge_drift,
    projector_leakage,
    residual_check,
    scattering_diagnostic,
    wave_data_norm,
    write_snapshots,
)
from dwlab.solver.systems import (
    SIGNS,
    Solution,
    WaveData,
    data_norm,
    initial_components,
    scale_components,
    sup_difference,
    system_forcing,
)

logger = get_logger(__name__)


def picard_solve(
    data: Union[WaveData, SpinorField],
    cfg: PicardConfig,
    analysis: Optional[ShellAnalysis] = None,
) -> Tuple[Solution, SolveReport]:
    """
    Picard iteration ``u^{n+1}_theta = e^{-theta i t h} u_theta(0) + i int_0^t e^{-theta i (t-s) h} F_theta(u^n)(s) ds``
    for both signs, started from the free evolution.

    The iteration stops once the sup-in-time ``L^2`` difference of successive
    iterates is below ``cfg.tol * ||data||`` or after ``cfg.max_iter``
    updates. A contraction ratio ``>= 1`` is recorded as non-contraction and
    the iteration carries on.

    Args:
        data: ``(u, d_t u)`` as a :obj:`WaveDataPair` or the half-wave pair
            ``(u_+, u_-)`` for the wave system; ``psi_0`` for the Dirac system.
        cfg (:obj:`PicardConfig`): the solve settings.
        analysis (:obj:`ShellAnalysis`, `optional`): angular analysis for the
            ``<Omega>^sigma`` data norm.

    Returns:
        :obj:`Tuple[Solution, SolveReport]`: both sign components on the
        window and the iteration record with diagnostics.
    """
    law = cfg.law
    times = cfg.times
    components = initial_components(data, cfg)
    report = SolveReport(name=cfg.name, system=cfg.system, config=cfg.to_dict())

    norm = data_norm(components)
    if cfg.normalize and norm > 0:
        components = scale_components(components, cfg.eps / norm)
        norm = cfg.eps
    elif norm > cfg.eps:
        report.warn(f"data norm {norm:.3e} exceeds eps={cfg.eps:g}")
    report.data_norm = norm

    if cfg.system == "wave_null":
        report.weighted_data_norm = wave_data_norm(
            recompose(components[1], components[-1], law), cfg.sigma, analysis
        )
    else:
        psi0 = components[1] + components[-1]
        report.weighted_data_norm = apply_omega_weight(psi0, cfg.sigma, analysis).l2_norm()

    free = {theta: evolve_path(components[theta], law, theta, times) for theta in SIGNS}
    current = free
    if norm == 0.0:
        report.iterations = 1
        report.differences.append(0.0)
        report.converged = True
    else:
        for iteration in range(1, cfg.max_iter + 1):
            forcing = system_forcing(current, cfg)
            updated = {
                theta: free[theta] + duhamel_solution(forcing[theta], law, theta) for theta in SIGNS
            }
            difference = sup_difference(updated, current)
            report.differences.append(difference)
            if len(report.differences) > 1 and report.differences[-2] > 0:
                ratio = difference / report.differences[-2]
                report.ratios.append(ratio)
                if ratio >= 1.0 and not report.non_contraction:
                    report.non_contraction = True
                    report.warn(
                        f"iteration {iteration}: contraction ratio {ratio:.3g} >= 1, eps={cfg.eps:g} is too large"
                    )
            current = updated
            report.iterations = iteration
            logger.debug(f"[{cfg.name}] iteration {iteration}: difference {difference:.3e}")
            if difference <= cfg.tol * norm:
                report.converged = True
                break
        if not report.converged:
            report.warn(f"no convergence to tol={cfg.tol:g} within {cfg.max_iter} iterations")

    solution = Solution(components=current, law=law, system=cfg.system)
    report.residual = residual_check(solution, cfg)
    report.scattering = scattering_diagnostic(solution)
    report.charge_drift = charge_drift(solution)
    if cfg.system == "dirac_hartree":
        report.projector_leakage = projector_leakage(solution, cfg.mass)
    if cfg.snapshot_dir and cfg.snapshot_stride > 0:
        report.snapshots = write_snapshots(solution, cfg.snapshot_dir, cfg.name, cfg.snapshot_stride)
    for message in report.warnings:
        logger.warning(f"[{cfg.name}] {message}")
    logger.info(
        f"[{cfg.name}] {cfg.system}: {report.iterations} iterations, "
        f"converged={report.converged}, residual={report.residual:.3e}"
    )
    return solution, report
