import math
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from dwlab.angular.harmonics import (
    MAX_SUPPORTED_DEGREE,
    coefficient_count,
    column_degrees,
    harmonics_matrix,
    to_spherical,
)
from dwlab.common.log import get_logger
from dwlab.grid.spec import GridSpec

logger = get_logger(__name__)

DEFAULT_ANALYSIS_DEGREE = 16
MIN_POINTS_RATIO = 1.5
MAX_CONDITION = 100.0

DegreeWeights = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Shell:
    """
    Lattice points with one exact integer ``|n|^2``.

    ``q, r`` is the thin QR factorisation of the harmonics matrix up to degree
    ``cap`` sampled at the shell directions.
    """

    norm_squared: int
    indices: np.ndarray
    cap: int
    q: np.ndarray
    r: np.ndarray

    @property
    def size(self) -> int:
        return self.indices.size

    @property
    def degrees(self) -> np.ndarray:
        return column_degrees(self.cap)


def choose_cap(
    polar: np.ndarray,
    azimuth: np.ndarray,
    max_degree: int,
    min_points_ratio: float = MIN_POINTS_RATIO,
    max_condition: float = MAX_CONDITION,
) -> Tuple[int, np.ndarray]:
    """
    Largest degree ``l <= max_degree`` with ``#points >= ratio (l+1)^2`` and a
    harmonics matrix of condition number ``<= max_condition``. Degree 0 is
    always admissible.
    """
    count = polar.size
    cap = min(max_degree, int(math.floor(math.sqrt(count / min_points_ratio))) - 1)
    cap = max(cap, 0)
    matrix = harmonics_matrix(cap, polar, azimuth)
    while cap > 0 and np.linalg.cond(matrix[:, : coefficient_count(cap)]) > max_condition:
        cap -= 1
    return cap, matrix[:, : coefficient_count(cap)]


class ShellAnalysis:
    """
    Angular analysis of lattice spectra, one least-squares fit per frequency shell.

    Each shell ``{n : |n|^2 = s}`` is fitted onto real harmonics up to its own
    degree cap (see :func:`choose_cap`). Degree weights act on the fitted
    coefficients; the part of the shell data the fit cannot represent is
    assigned degree ``cap + 1``. Weights that sum to one over a family
    therefore resolve the identity exactly, and families with disjoint degree
    supports annihilate each other.

    Args:
        grid (:obj:`GridSpec`): the lattice.
        max_degree (:obj:`int`, `optional`, defaults to 16): largest fitted degree.
    """

    def __init__(
        self,
        grid: GridSpec,
        max_degree: int = DEFAULT_ANALYSIS_DEGREE,
        min_points_ratio: float = MIN_POINTS_RATIO,
        max_condition: float = MAX_CONDITION,
    ):
        if not 0 <= max_degree <= MAX_SUPPORTED_DEGREE:
            raise ValueError(
                f"max_degree must lie in [0, {MAX_SUPPORTED_DEGREE}], got {max_degree}"
            )
        self.grid = grid
        self.max_degree = max_degree
        self.min_points_ratio = min_points_ratio
        self.max_condition = max_condition

    @cached_property
    def shells(self) -> List[Shell]:
        grid = self.grid
        norm_squared = grid.lattice_norm_squared.ravel()
        order = np.argsort(norm_squared, kind="stable")
        values, starts = np.unique(norm_squared[order], return_index=True)
        bounds = list(starts[1:]) + [order.size]
        index = grid.lattice_indices
        shells = []
        for value, start, stop in zip(values, starts, bounds):
            flat = order[start:stop]
            i1, i2, i3 = np.unravel_index(flat, grid.shape)
            polar, azimuth = to_spherical(index[i1], index[i2], index[i3])
            cap, matrix = choose_cap(
                polar, azimuth, self.max_degree, self.min_points_ratio, self.max_condition
            )
            q, r = np.linalg.qr(matrix)
            shells.append(Shell(norm_squared=int(value), indices=flat, cap=cap, q=q, r=r))
        logger.debug(
            f"Shell analysis on M={grid.points_per_axis}: {len(shells)} shells, "
            f"caps up to {max(s.cap for s in shells)}"
        )
        return shells

    @cached_property
    def caps(self) -> np.ndarray:
        """Degree cap of the shell through every lattice point."""
        caps = np.empty(self.grid.size, dtype=int)
        for shell in self.shells:
            caps[shell.indices] = shell.cap
        return caps.reshape(self.grid.shape)

    def resolved_mask(self, degree: int, margin: int = 0) -> np.ndarray:
        """Lattice points whose shell fits degrees up to ``degree + margin``."""
        return self.caps >= degree + margin

    def _shell_pieces(self, shell: Shell, values: np.ndarray):
        projected = shell.q.T @ values
        coefficients = solve_triangular(shell.r, projected)
        residual = values - shell.q @ projected
        return coefficients, residual

    def apply_degree_weights(self, spectrum: np.ndarray, weights: DegreeWeights) -> np.ndarray:
        """
        Multiply the degree-``l`` content of a continuum spectrum by ``weights(l)``.

        Args:
            spectrum (:obj:`np.ndarray`): ``(..., M, M, M)`` frequency-side values.
            weights (:obj:`Callable`): maps an integer degree array to weights.
        """
        spectrum = np.asarray(spectrum)
        if spectrum.shape[-3:] != self.grid.shape:
            raise ValueError(f"Spectrum shape {spectrum.shape} does not match {self.grid.shape}")
        flat = spectrum.reshape((-1, self.grid.size))
        out = np.empty_like(flat, dtype=np.complex128)
        for shell in self.shells:
            values = flat[:, shell.indices].T
            coefficients, residual = self._shell_pieces(shell, values)
            weighted = np.asarray(weights(shell.degrees), dtype=float)[:, None] * coefficients
            residual_weight = float(np.asarray(weights(np.array([shell.cap + 1])))[0])
            out[:, shell.indices] = (shell.q @ (shell.r @ weighted) + residual_weight * residual).T
        return out.reshape(spectrum.shape)

    def residual_fraction(self, spectrum: np.ndarray) -> float:
        """Share of ``||spectrum||^2`` outside the fitted harmonics of each shell."""
        flat = np.asarray(spectrum).reshape((-1, self.grid.size))
        total = float(np.sum(np.abs(flat) ** 2))
        if total == 0.0:
            return 0.0
        unresolved = 0.0
        for shell in self.shells:
            _, residual = self._shell_pieces(shell, flat[:, shell.indices].T)
            unresolved += float(np.sum(np.abs(residual) ** 2))
        return unresolved / total

    def degree_energy(self, spectrum: np.ndarray) -> Dict[int, float]:
        """``sum |fitted degree-l part|^2`` per degree; residuals land on ``cap + 1``."""
        flat = np.asarray(spectrum).reshape((-1, self.grid.size))
        energy: Dict[int, float] = {}
        for shell in self.shells:
            coefficients, residual = self._shell_pieces(shell, flat[:, shell.indices].T)
            for degree in range(shell.cap + 1):
                mask = shell.degrees == degree
                part = shell.q @ (shell.r[:, mask] @ coefficients[mask])
                energy[degree] = energy.get(degree, 0.0) + float(np.sum(np.abs(part) ** 2))
            energy[shell.cap + 1] = energy.get(shell.cap + 1, 0.0) + float(np.sum(np.abs(residual) ** 2))
        return energy


_ANALYSES: Dict[Tuple[GridSpec, int], ShellAnalysis] = {}
_ANALYSES_LOCK = threading.Lock()


def shell_analysis(grid: GridSpec, max_degree: int = DEFAULT_ANALYSIS_DEGREE) -> ShellAnalysis:
    """Shared :class:`ShellAnalysis` per ``(grid, max_degree)`` with its shells built."""
    key = (grid, max_degree)
    with _ANALYSES_LOCK:
        if key not in _ANALYSES:
            analysis = ShellAnalysis(grid, max_degree)
            _ = analysis.shells
            _ANALYSES[key] = analysis
        return _ANALYSES[key]
