from typing import Optional, Sequence

import numpy as np

from dwlab.common.log import get_logger
from dwlab.grid.fields import ScalarField
from dwlab.grid.norms import lebesgue_norm
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale
from dwlab.multiplier.caps import CapCollection, angular_resolution_warning
from dwlab.multiplier.littlewood_paley import annulus_symbol, check_annulus_resolution
from dwlab.normbench.report import ProbeReport

logger = get_logger(__name__)

BERNSTEIN_ESTIMATE = "||R_kappa P_lambda f||_inf <~ (lambda^3 alpha^2)^(1/p) ||f||_p"


def point_mass(grid: GridSpec) -> ScalarField:
    """Unit spike at the grid point ``x = 0``."""
    values = np.zeros(grid.shape, dtype=np.complex128)
    centre = grid.points_per_axis // 2
    values[centre, centre, centre] = 1.0 / grid.cell_volume
    return ScalarField(grid=grid, values=values)


def random_field(grid: GridSpec, rng: np.random.Generator) -> ScalarField:
    values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return ScalarField(grid=grid, values=values)


def bernstein_probe(
    grid: GridSpec,
    scale: float,
    alpha: float,
    p: float = 2.0,
    trials: int = 4,
    seed: int = 0,
    direction: Sequence[float] = (0.0, 0.0, 1.0),
    fields: Optional[Sequence[ScalarField]] = None,
    bump: BumpFunction = DEFAULT_BUMP,
) -> ProbeReport:
    """
    Bernstein ratio ``||R_kappa P_lambda f||_inf / ||f||_p`` at one ``(lambda, alpha)``.

    The trial inputs are ``R_kappa P_lambda`` applied to a point mass (the
    concentration witness) and to ``trials`` complex Gaussian fields, unless
    ``fields`` are given explicitly. Zero inputs count as skipped trials.

    Returns:
        :obj:`ProbeReport`: one sample, the max ratio over trials, with the
        ratio normalised by ``(lambda^3 alpha^2)^(1/p)`` in ``extras``.
    """
    lam = DyadicScale.of(scale).value
    report = ProbeReport(
        name="bernstein",
        estimate=BERNSTEIN_ESTIMATE,
        params={"lambda": lam, "alpha": alpha, "p": p, "trials": trials},
        environment={"grid": grid.to_dict(), "bump": bump.identifier, "seed": seed},
    )
    for message in check_annulus_resolution(grid, lam):
        report.warn(message)
    message = angular_resolution_warning(grid, alpha, lam)
    if message:
        report.warn(message)

    caps = CapCollection(alpha)
    cap = caps.nearest(np.asarray(direction, dtype=float))
    symbol = annulus_symbol(grid, lam, bump, inhomogeneous=False) * caps.weight(cap, grid)

    if fields is None:
        rng = np.random.default_rng(seed)
        fields = [point_mass(grid).apply_symbol(symbol)]
        fields += [random_field(grid, rng).apply_symbol(symbol) for _ in range(trials)]

    best = 0.0
    for f in fields:
        denominator = lebesgue_norm(f, p)
        if denominator == 0.0:
            report.skipped += 1
            continue
        numerator = lebesgue_norm(f.apply_symbol(symbol), np.inf)
        best = max(best, numerator / denominator)

    report.add_sample(best, **{"lambda": lam, "alpha": alpha, "p": p})
    report.extras["normalized"] = best / (lam**3 * alpha**2) ** (1.0 / p)
    report.extras["cap"] = {"index": cap.index, "center": cap.center}
    return report
