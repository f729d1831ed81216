import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from dwlab.grid.fields import FieldType, SpacetimeField, spatial_ifft
from dwlab.propagator.dispersion import WAVE, DispersionLaw
from dwlab.propagator.duhamel import twisted_spectrum

Path = Union[SpacetimeField, Sequence[FieldType], Sequence[float], np.ndarray]


@dataclass(frozen=True)
class Variation:
    """
    ``sup_norm`` is ``max_k ||v(t_k)||``; ``variation`` is the 2-variation
    ``sup (sum ||v(t_k) - v(t_{k-1})||^2)^{1/2}`` attained on ``points``.
    """

    sup_norm: float
    variation: float
    points: List[int]

    @property
    def total(self) -> float:
        return self.sup_norm + self.variation


def _samples(path: Path):
    """Flattened samples ``(K, n)`` and the per-sample norm weight."""
    if isinstance(path, SpacetimeField):
        return path.frames.reshape(path.sample_count, -1), path.grid.cell_volume
    items = list(path)
    if items and hasattr(items[0], "values") and hasattr(items[0], "grid"):
        first = items[0]
        for item in items[1:]:
            first.check_compatible(item)
        return np.stack([f.values.ravel() for f in items]), first.grid.cell_volume
    return np.asarray(items, dtype=np.complex128).reshape(len(items), -1), 1.0


def distance_matrix(path: Path) -> np.ndarray:
    """``D[i, j] = ||v(t_i) - v(t_j)||`` (``L^2_x`` for fields, modulus for scalars)."""
    samples, weight = _samples(path)
    count = samples.shape[0]
    distances = np.zeros((count, count))
    for i in range(count - 1):
        diff = samples[i + 1:] - samples[i]
        distances[i, i + 1:] = np.sqrt(np.sum(np.abs(diff) ** 2, axis=1) * weight)
    return distances + distances.T


def sup_norm(path: Path) -> float:
    samples, weight = _samples(path)
    if samples.shape[0] == 0:
        raise ValueError("The 2-variation needs at least one sample")
    return float(np.sqrt(np.max(np.sum(np.abs(samples) ** 2, axis=1)) * weight))


def variation(path: Path) -> Variation:
    """
    Exact 2-variation over increasing subsequences of the sample times.

    ``best[j] = max_{i < j} best[i] + D[i, j]^2`` over the ``O(K^2)`` pairs.
    Prepending a point never lowers a sum, so the chain may start at sample 0.
    """
    distances = distance_matrix(path)
    count = distances.shape[0]
    if count == 0:
        raise ValueError("The 2-variation needs at least one sample")
    best = np.zeros(count)
    link = np.full(count, -1)
    squared = distances**2
    for j in range(1, count):
        candidates = best[:j] + squared[:j, j]
        i = int(np.argmax(candidates))
        best[j], link[j] = candidates[i], i
    end = int(np.argmax(best))
    points = [end]
    while link[points[-1]] >= 0:
        points.append(int(link[points[-1]]))
    return Variation(sup_norm=sup_norm(path), variation=math.sqrt(best[end]), points=points[::-1])


def v2_norm(path: Path) -> float:
    """``||v||_{L^inf_t L^2_x} + |v|_{V^2}``."""
    return variation(path).total


def variation_brute_force(path: Path) -> float:
    """2-variation by enumerating every increasing subsequence; for small ``K`` only."""
    distances = distance_matrix(path)
    count = distances.shape[0]
    if count > 16:
        raise ValueError(f"Brute force enumeration is limited to K <= 16, got {count}")
    best = 0.0
    for size in range(2, count + 1):
        for chain in itertools.combinations(range(count), size):
            total = sum(distances[a, b] ** 2 for a, b in zip(chain, chain[1:]))
            best = max(best, total)
    return math.sqrt(best)


def twisted_path(u: SpacetimeField, law: DispersionLaw = WAVE, theta: Union[int, str] = 1) -> SpacetimeField:
    """``e^{theta i t h(D)} u(t)``: constant in time for a free wave of sign ``theta``."""
    return u.with_frames(spatial_ifft(twisted_spectrum(u, law, theta)))
