import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Tuple

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """
    Periodic cube ``[-L, L)^3`` sampled with ``M`` points per axis.

    The frequency lattice is ``(pi / L) * n`` with integer ``n`` in
    ``{-M/2, ..., M/2 - 1}^3``. Integer lattice indices are kept alongside the
    physical wavenumbers so that shell membership and multiplier supports are
    decided on exact integers.

    Args:
        half_period (:obj:`float`):
            Half side ``L`` of the box.
        points_per_axis (:obj:`int`):
            Even number of samples ``M >= 8`` per axis.
    """

    half_period: float
    points_per_axis: int

    def __post_init__(self):
        if not self.half_period > 0 or not math.isfinite(self.half_period):
            raise ValueError(f"half_period must be positive, got {self.half_period}")
        if int(self.points_per_axis) != self.points_per_axis:
            raise ValueError(
                f"points_per_axis must be an integer, got {self.points_per_axis}"
            )
        if self.points_per_axis < 8 or self.points_per_axis % 2:
            raise ValueError(
                f"points_per_axis must be even and >= 8, got {self.points_per_axis}"
            )
        object.__setattr__(self, "half_period", float(self.half_period))
        object.__setattr__(self, "points_per_axis", int(self.points_per_axis))

    @property
    def shape(self) -> Tuple[int, int, int]:
        m = self.points_per_axis
        return (m, m, m)

    @property
    def size(self) -> int:
        return self.points_per_axis**3

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_period / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def volume(self) -> float:
        return (2.0 * self.half_period) ** 3

    @property
    def frequency_spacing(self) -> float:
        return math.pi / self.half_period

    @property
    def nyquist(self) -> float:
        """Largest resolved wavenumber along an axis."""
        return 0.5 * self.points_per_axis * self.frequency_spacing

    @cached_property
    def lattice_indices(self) -> np.ndarray:
        """Integer frequency indices in FFT order."""
        m = self.points_per_axis
        return np.fft.fftfreq(m, d=1.0 / m).round().astype(np.int64)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return self.lattice_indices * self.frequency_spacing

    @cached_property
    def coordinates(self) -> np.ndarray:
        return -self.half_period + self.spacing * np.arange(self.points_per_axis)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sparse ``(x1, x2, x3)`` coordinate arrays broadcasting to :attr:`shape`."""
        return tuple(np.meshgrid(*(self.coordinates,) * 3, indexing="ij", sparse=True))

    def frequency_mesh(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sparse ``(xi1, xi2, xi3)`` arrays broadcasting to :attr:`shape`."""
        return tuple(np.meshgrid(*(self.wavenumbers,) * 3, indexing="ij", sparse=True))

    def lattice_mesh(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            np.meshgrid(*(self.lattice_indices,) * 3, indexing="ij", sparse=True)
        )

    @cached_property
    def lattice_norm_squared(self) -> np.ndarray:
        """Exact integer ``|n|^2`` per lattice point."""
        n1, n2, n3 = self.lattice_mesh()
        return n1**2 + n2**2 + n3**2

    @cached_property
    def frequency_norm(self) -> np.ndarray:
        """``|xi|`` per lattice point."""
        return np.sqrt(self.lattice_norm_squared) * self.frequency_spacing

    @cached_property
    def parity(self) -> np.ndarray:
        """``(-1)^(n1+n2+n3)``, the phase relating the box origin ``-L`` to ``0``."""
        n1, n2, n3 = self.lattice_mesh()
        return np.where((n1 + n2 + n3) % 2 == 0, 1.0, -1.0)

    def radius(self) -> np.ndarray:
        x1, x2, x3 = self.mesh()
        return np.sqrt(x1**2 + x2**2 + x3**2)

    def nearest_lattice_index(self, xi: np.ndarray) -> np.ndarray:
        """Round a wavevector to the integer index of the nearest lattice frequency."""
        n = np.rint(np.asarray(xi, dtype=float) / self.frequency_spacing).astype(int)
        half = self.points_per_axis // 2
        if np.any(n < -half) or np.any(n > half - 1):
            raise ValueError(f"Wavevector {xi} is outside the resolved lattice")
        return n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "half_period": self.half_period,
            "points_per_axis": self.points_per_axis,
            "cell_volume": self.cell_volume,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        return cls(
            half_period=float(data["half_period"]),
            points_per_axis=int(data["points_per_axis"]),
        )
