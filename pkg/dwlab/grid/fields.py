from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Sequence, Union

import numpy as np
import scipy.fft as sfft

from dwlab.common.utils import fft_workers
from dwlab.grid.spec import GridSpec

SPATIAL_AXES = (-3, -2, -1)


class Domain(Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


def spatial_fft(values: np.ndarray) -> np.ndarray:
    """Unscaled DFT over the last three axes."""
    return sfft.fftn(values, axes=SPATIAL_AXES, workers=fft_workers())


def spatial_ifft(values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`spatial_fft`."""
    return sfft.ifftn(values, axes=SPATIAL_AXES, workers=fft_workers())


def _frozen_copy(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.complex128, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Field:
    """
    Complex samples on a :class:`GridSpec`.

    ``values`` has shape ``grid.shape`` for scalar fields and
    ``(4,) + grid.shape`` for spinor fields. The array is copied and frozen at
    construction; all operations return new fields.
    """

    grid: GridSpec
    values: np.ndarray
    domain: Domain = Domain.PHYSICAL

    components: int = 1

    def __post_init__(self):
        values = _frozen_copy(self.values)
        expected = self.grid.shape if self.components == 1 else (self.components,) + self.grid.shape
        if values.shape != expected:
            raise ValueError(
                f"{type(self).__name__} on M={self.grid.points_per_axis} expects "
                f"shape {expected}, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    # construction helpers

    @classmethod
    def zeros(cls, grid: GridSpec, domain: Domain = Domain.PHYSICAL):
        shape = grid.shape if cls.components == 1 else (cls.components,) + grid.shape
        return cls(grid=grid, values=np.zeros(shape, dtype=np.complex128), domain=domain)

    def with_values(self, values: np.ndarray, domain: Domain | None = None):
        return type(self)(
            grid=self.grid, values=values, domain=self.domain if domain is None else domain
        )

    # spectral helpers

    def spectrum(self) -> np.ndarray:
        """Unscaled DFT of the physical samples."""
        self._require(Domain.PHYSICAL)
        return spatial_fft(self.values)

    @classmethod
    def from_spectrum(cls, grid: GridSpec, spectrum: np.ndarray):
        """Inverse of :meth:`spectrum`."""
        return cls(grid=grid, values=spatial_ifft(spectrum))

    def apply_symbol(self, symbol: np.ndarray):
        """
        Fourier multiplier. ``symbol`` broadcasts against the spatial axes, so a
        scalar symbol acts componentwise on spinors.
        """
        return type(self).from_spectrum(self.grid, self.spectrum() * symbol)

    # algebra

    def check_compatible(self, other: "Field"):
        if not isinstance(other, Field):
            raise TypeError(f"Expected a field, got {type(other).__name__}")
        if other.grid != self.grid:
            raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}")
        if other.components != self.components or other.domain != self.domain:
            raise ValueError(
                f"Field mismatch: {type(self).__name__}/{self.domain.value} vs "
                f"{type(other).__name__}/{other.domain.value}"
            )

    def _require(self, domain: Domain):
        if self.domain != domain:
            raise ValueError(f"Operation needs a {domain.value}-space field")

    def __add__(self, other: "Field"):
        self.check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field"):
        self.check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: complex):
        if not np.isscalar(scalar):
            raise TypeError("Fields only scale by numbers; use apply_symbol for multipliers")
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def conj(self):
        return self.with_values(np.conj(self.values))

    def pointwise_magnitude(self) -> np.ndarray:
        """``|f(x)|``, with the C^4 Euclidean norm for spinors."""
        if self.components == 1:
            return np.abs(self.values)
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))

    def l2_norm(self) -> float:
        return float(
            np.sqrt(np.sum(self.pointwise_magnitude() ** 2) * self.grid.cell_volume)
        )


@dataclass(frozen=True, eq=False)
class ScalarField(Field):
    components: int = 1


@dataclass(frozen=True, eq=False)
class SpinorField(Field):
    components: int = 4

    def component(self, index: int) -> ScalarField:
        return ScalarField(grid=self.grid, values=self.values[index], domain=self.domain)

    @classmethod
    def from_components(cls, parts: Sequence[ScalarField]) -> "SpinorField":
        if len(parts) != 4:
            raise ValueError(f"A spinor needs 4 components, got {len(parts)}")
        grid = parts[0].grid
        for part in parts[1:]:
            parts[0].check_compatible(part)
        return cls(grid=grid, values=np.stack([p.values for p in parts]), domain=parts[0].domain)


FieldType = Union[ScalarField, SpinorField]


def field_class(components: int):
    match components:
        case 1:
            return ScalarField
        case 4:
            return SpinorField
        case _:
            raise ValueError(f"Fields have 1 or 4 components, got {components}")


@dataclass(frozen=True, eq=False)
class SpacetimeField:
    """
    Uniformly sampled frames ``u(k * dt)``, ``k = 0..K-1`` on a common grid.

    ``frames`` is one array of shape ``(K,) + frame_shape``; ``window`` is
    ``(K - 1) * dt``.
    """

    grid: GridSpec
    time_step: float
    frames: np.ndarray
    components: int = 1

    def __post_init__(self):
        if not self.time_step > 0:
            raise ValueError(f"time_step must be positive, got {self.time_step}")
        frames = _frozen_copy(self.frames)
        frame_shape = self.grid.shape if self.components == 1 else (self.components,) + self.grid.shape
        if frames.ndim != len(frame_shape) + 1 or frames.shape[1:] != frame_shape:
            raise ValueError(
                f"Frames must have shape (K,) + {frame_shape}, got {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise ValueError("A spacetime field needs at least one frame")
        object.__setattr__(self, "time_step", float(self.time_step))
        object.__setattr__(self, "frames", frames)

    @property
    def sample_count(self) -> int:
        return self.frames.shape[0]

    @property
    def window(self) -> float:
        return (self.sample_count - 1) * self.time_step

    @property
    def times(self) -> np.ndarray:
        return self.time_step * np.arange(self.sample_count)

    def frame(self, k: int) -> FieldType:
        return field_class(self.components)(grid=self.grid, values=self.frames[k])

    def __iter__(self):
        return (self.frame(k) for k in range(self.sample_count))

    def __len__(self):
        return self.sample_count

    @classmethod
    def from_frames(cls, frames: Iterable[FieldType], time_step: float) -> "SpacetimeField":
        frames = list(frames)
        if not frames:
            raise ValueError("A spacetime field needs at least one frame")
        first = frames[0]
        for frame in frames[1:]:
            first.check_compatible(frame)
        return cls(
            grid=first.grid,
            time_step=time_step,
            frames=np.stack([f.values for f in frames]),
            components=first.components,
        )

    def map_frames(self, fn: Callable[[FieldType], FieldType]) -> "SpacetimeField":
        return SpacetimeField.from_frames([fn(f) for f in self], self.time_step)

    def with_frames(self, frames: np.ndarray) -> "SpacetimeField":
        return SpacetimeField(
            grid=self.grid, time_step=self.time_step, frames=frames, components=self.components
        )

    def check_compatible(self, other: "SpacetimeField"):
        if (
            other.grid != self.grid
            or other.components != self.components
            or other.sample_count != self.sample_count
            or not np.isclose(other.time_step, self.time_step, rtol=1e-12, atol=0.0)
        ):
            raise ValueError("Spacetime fields differ in grid, components or sampling")

    def __add__(self, other: "SpacetimeField"):
        self.check_compatible(other)
        return self.with_frames(self.frames + other.frames)

    def __sub__(self, other: "SpacetimeField"):
        self.check_compatible(other)
        return self.with_frames(self.frames - other.frames)

    def __mul__(self, scalar: complex):
        return self.with_frames(self.frames * scalar)

    __rmul__ = __mul__

    def frame_norms(self) -> List[float]:
        return [f.l2_norm() for f in self]
