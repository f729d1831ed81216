import math
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from dwlab.common.log import get_logger
from dwlab.common.utils import NumericalError
from dwlab.grid.fields import FieldType
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import smooth_step

logger = get_logger(__name__)

# caps per unit alpha^-2; keeps the covering radius near alpha / 2
CAPS_PER_AREA = 20.0


def fibonacci_sphere(count: int) -> np.ndarray:
    """``count`` quasi-uniform unit vectors on the golden-angle spiral."""
    if count < 1:
        raise ValueError(f"Need at least one point, got {count}")
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    radius = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([radius * np.cos(phi), radius * np.sin(phi), z], axis=1)


@dataclass(frozen=True, eq=False)
class Cap:
    index: int
    center: np.ndarray
    radius: float


def _directions(grid: GridSpec):
    xi1, xi2, xi3 = grid.frequency_mesh()
    norm = grid.frequency_norm
    safe = np.where(norm > 0, norm, 1.0)
    return xi1 / safe, xi2 / safe, xi3 / safe, norm > 0


@dataclass(eq=False)
class CapCollection:
    """
    Caps of radius ``alpha`` centred on a Fibonacci covering of ``S^2`` with a
    smooth angular partition of unity.

    The raw weight of cap ``k`` at direction ``omega`` is
    ``1 - smooth_step(angle(omega, omega_k) / alpha)``; normalised weights divide
    by the raw sum over all caps, tabulated once per grid. ``xi = 0`` has
    weight 0 in every cap.
    """

    radius: float
    _normalizers: Dict[GridSpec, np.ndarray] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.radius <= 1:
            raise ValueError(f"Cap radius must lie in (0, 1], got {self.radius}")
        count = math.ceil(CAPS_PER_AREA / self.radius**2)
        self.centers = fibonacci_sphere(count)
        self.caps = [Cap(index=i, center=c, radius=self.radius) for i, c in enumerate(self.centers)]

    def __len__(self) -> int:
        return len(self.caps)

    def __iter__(self):
        return iter(self.caps)

    def raw_weight(self, cap: Cap, omega1, omega2, omega3) -> np.ndarray:
        cosine = omega1 * cap.center[0] + omega2 * cap.center[1] + omega3 * cap.center[2]
        angle = np.arccos(np.clip(cosine, -1.0, 1.0))
        return 1.0 - smooth_step(angle / self.radius)

    def raw_direction_weights(self, direction: np.ndarray) -> np.ndarray:
        """Raw weights of every cap at one unit direction."""
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        angle = np.arccos(np.clip(self.centers @ direction, -1.0, 1.0))
        return 1.0 - smooth_step(angle / self.radius)

    def normalizer(self, grid: GridSpec) -> np.ndarray:
        """``sum_k raw_k`` on the lattice directions, cached per grid."""
        with self._lock:
            if grid not in self._normalizers:
                omega1, omega2, omega3, nonzero = _directions(grid)
                total = np.zeros(grid.shape)
                for cap in self.caps:
                    total += self.raw_weight(cap, omega1, omega2, omega3)
                if np.any(total[nonzero] == 0):
                    raise NumericalError(
                        f"Caps of radius {self.radius} leave lattice directions uncovered"
                    )
                self._normalizers[grid] = total
            return self._normalizers[grid]

    def weight(self, cap: Cap, grid: GridSpec) -> np.ndarray:
        """Normalised ``rho_kappa(xi / |xi|)`` on the lattice."""
        omega1, omega2, omega3, nonzero = _directions(grid)
        raw = self.raw_weight(cap, omega1, omega2, omega3)
        return np.where(nonzero, raw / self.normalizer(grid), 0.0)

    def direction_weight(self, cap: Cap, direction: np.ndarray) -> float:
        """Normalised weight of ``cap`` at an arbitrary direction."""
        raw = self.raw_direction_weights(direction)
        return float(raw[cap.index] / raw.sum())

    def nearest(self, direction: np.ndarray) -> Cap:
        direction = np.asarray(direction, dtype=float)
        return self.caps[int(np.argmax(self.centers @ direction))]

    def overlap_count(self, grid: GridSpec) -> np.ndarray:
        """Number of caps whose support contains each lattice direction."""
        omega1, omega2, omega3, nonzero = _directions(grid)
        count = np.zeros(grid.shape, dtype=int)
        for cap in self.caps:
            count += (self.raw_weight(cap, omega1, omega2, omega3) > 0).astype(int)
        return np.where(nonzero, count, 0)


def angular_resolution_warning(grid: GridSpec, radius: float, scale: Optional[float]) -> Optional[str]:
    """A message when ``alpha`` is finer than the lattice angular spacing at ``scale``."""
    if scale is None:
        return None
    limit = 2.0 * grid.frequency_spacing / float(scale)
    if radius < limit:
        return (
            f"cap radius {radius:.4g} under-resolves the angular lattice spacing "
            f"{limit:.4g} at scale {float(scale):g}"
        )
    return None


def project_cap(
    f: FieldType,
    cap: Cap,
    collection: CapCollection,
    scale: Optional[float] = None,
) -> FieldType:
    """
    Angular localisation ``R_kappa f``.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space field.
        cap (:obj:`Cap`): a cap of ``collection``.
        collection (:obj:`CapCollection`): the partition the cap belongs to.
        scale (:obj:`float`, `optional`):
            the dominant frequency of ``f``; enables the under-resolution warning.
    """
    message = angular_resolution_warning(f.grid, collection.radius, scale)
    if message:
        logger.warning(message)
    return f.apply_symbol(collection.weight(cap, f.grid))


def caps_meeting(collection: CapCollection, grid: GridSpec, support: np.ndarray) -> List[Cap]:
    """Caps whose raw weight is nonzero somewhere on the boolean ``support`` mask."""
    omega1, omega2, omega3, _ = _directions(grid)
    return [
        c for c in collection.caps
        if np.any(collection.raw_weight(c, omega1, omega2, omega3)[support] > 0)
    ]
