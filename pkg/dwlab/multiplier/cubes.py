import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np

from dwlab.grid.fields import FieldType
from dwlab.grid.spec import GridSpec
from dwlab.multiplier.bump import DyadicScale, smooth_step


def cell_weight(y: np.ndarray) -> np.ndarray:
    """1-D hat ``1 - smooth_step(|y|)`` on ``(-1, 1)``; its integer shifts sum to 1."""
    return 1.0 - smooth_step(np.abs(y))


@dataclass(frozen=True)
class Cube:
    """
    One cube of a :class:`CubeCollection`: lattice index ``q`` and centre
    ``q * spacing``. The weight is supported in the open cube of side
    ``2 * spacing`` around the centre.
    """

    index: Tuple[int, int, int]
    spacing: float

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.index, dtype=float) * self.spacing

    @property
    def side(self) -> float:
        return 2.0 * self.spacing

    @property
    def diameter(self) -> float:
        return math.sqrt(3.0) * self.side


@dataclass
class CubeCollection:
    """
    Finitely overlapping cubes of side ``mu / side_ratio`` covering the
    frequency lattice of ``grid``, with a tensor-product partition of unity.
    ``side_ratio`` fixes the side, not the diagonal: a cube has diameter
    ``sqrt(3) mu / side_ratio``. Only the implicit constants depend on the choice.

    Every frequency lies in at most 8 cube supports (2 per axis).

    Args:
        grid (:obj:`GridSpec`): the lattice to cover.
        scale (:obj:`DyadicScale` or :obj:`float`): the scale ``mu``.
        side_ratio (:obj:`float`, `optional`, defaults to 4): ``c_0``.
    """

    grid: GridSpec
    scale: DyadicScale
    side_ratio: float = 4.0
    _axis_weights: Dict[int, np.ndarray] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.scale = DyadicScale.of(self.scale)
        if not self.side_ratio > 0:
            raise ValueError(f"side_ratio must be positive, got {self.side_ratio}")
        # one weight row per cell index along an axis
        y = self.grid.wavenumbers / self.spacing
        for q in self.axis_indices:
            self._axis_weights[q] = cell_weight(y - q)

    @property
    def spacing(self) -> float:
        """Distance between neighbouring centres, half the cube side."""
        return self.scale.value / (2.0 * self.side_ratio)

    @cached_property
    def axis_indices(self) -> List[int]:
        y = self.grid.wavenumbers / self.spacing
        low = math.floor(y.min()) - 1
        high = math.ceil(y.max()) + 1
        return [q for q in range(low, high + 1) if np.any(np.abs(y - q) < 1.0)]

    @cached_property
    def cubes(self) -> List[Cube]:
        return [
            Cube(index=(q1, q2, q3), spacing=self.spacing)
            for q1 in self.axis_indices
            for q2 in self.axis_indices
            for q3 in self.axis_indices
        ]

    def __len__(self) -> int:
        return len(self.axis_indices) ** 3

    def __iter__(self):
        return iter(self.cubes)

    def weight(self, cube: Cube) -> np.ndarray:
        """``rho_q`` on the lattice."""
        if not math.isclose(cube.spacing, self.spacing):
            raise ValueError("Cube does not belong to this collection")
        w1, w2, w3 = (self._axis_weights[q] for q in cube.index)
        return w1[:, None, None] * w2[None, :, None] * w3[None, None, :]

    def weight_sum(self) -> np.ndarray:
        """``sum_q rho_q`` evaluated through the tensor structure."""
        axis_total = sum(self._axis_weights.values())
        return axis_total[:, None, None] * axis_total[None, :, None] * axis_total[None, None, :]

    def overlap_count(self) -> np.ndarray:
        """Number of cube supports containing each lattice frequency."""
        axis_count = sum((w > 0).astype(int) for w in self._axis_weights.values())
        return axis_count[:, None, None] * axis_count[None, :, None] * axis_count[None, None, :]

    def containing(self, xi: np.ndarray) -> List[Cube]:
        """Cubes whose support contains the wavevector ``xi``."""
        y = np.asarray(xi, dtype=float) / self.spacing
        return [c for c in self.cubes if np.all(np.abs(y - np.asarray(c.index)) < 1.0)]


def project_cube(f: FieldType, cube: Cube, collection: CubeCollection) -> FieldType:
    """``P_q f = rho_q(-i grad) f``."""
    if collection.grid != f.grid:
        raise ValueError(f"Cube collection built on {collection.grid}, field on {f.grid}")
    return f.apply_symbol(collection.weight(cube))
