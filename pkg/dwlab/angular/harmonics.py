import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy.special import gammaln, lpmv

MAX_SUPPORTED_DEGREE = 32


def coefficient_count(max_degree: int) -> int:
    return (max_degree + 1) ** 2


def flat_index(degree: int, n: int) -> int:
    """Column of ``y_{l,n}`` in degree-major order; ``n = m + l`` in ``0..2l``."""
    return degree * degree + n


def iter_indices(max_degree: int) -> Iterator[Tuple[int, int]]:
    for degree in range(max_degree + 1):
        for n in range(2 * degree + 1):
            yield degree, n


@lru_cache(maxsize=None)
def column_degrees(max_degree: int) -> np.ndarray:
    degrees = np.repeat(np.arange(max_degree + 1), 2 * np.arange(max_degree + 1) + 1)
    degrees.flags.writeable = False
    return degrees


def _normalization(degree: int, order: int) -> float:
    """``sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)`` for ``m >= 0``."""
    log_ratio = gammaln(degree - order + 1) - gammaln(degree + order + 1)
    return math.sqrt((2 * degree + 1) / (4.0 * math.pi) * math.exp(log_ratio))


def real_harmonic(degree: int, n: int, polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    """
    Real orthonormal spherical harmonic ``y_{l,n}``, ``m = n - l``.

    ``m > 0`` uses ``sqrt(2) cos(m phi)``, ``m < 0`` uses ``sqrt(2) sin(|m| phi)``.
    ``polar`` is measured from the ``x3`` axis.
    """
    if degree < 0 or not 0 <= n <= 2 * degree:
        raise ValueError(f"No harmonic with l={degree}, n={n}")
    order = n - degree
    x = np.cos(np.asarray(polar, dtype=float))
    azimuth = np.asarray(azimuth, dtype=float)
    legendre_part = _normalization(degree, abs(order)) * lpmv(abs(order), degree, x)
    if order == 0:
        return legendre_part * np.ones_like(azimuth)
    if order > 0:
        return math.sqrt(2.0) * legendre_part * np.cos(order * azimuth)
    return math.sqrt(2.0) * legendre_part * np.sin(-order * azimuth)


def harmonics_matrix(max_degree: int, polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    """``Y[k, j] = y_j(omega_k)`` with columns in :func:`flat_index` order."""
    polar = np.ravel(polar)
    azimuth = np.ravel(azimuth)
    matrix = np.empty((polar.size, coefficient_count(max_degree)))
    for degree, n in iter_indices(max_degree):
        matrix[:, flat_index(degree, n)] = real_harmonic(degree, n, polar, azimuth)
    return matrix


def to_spherical(v1: np.ndarray, v2: np.ndarray, v3: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Polar and azimuthal angles of vectors; the zero vector maps to the pole."""
    radius = np.sqrt(v1**2 + v2**2 + v3**2)
    safe = np.where(radius > 0, radius, 1.0)
    polar = np.arccos(np.clip(np.where(radius > 0, v3 / safe, 1.0), -1.0, 1.0))
    return polar, np.arctan2(v2, v1)


@dataclass(frozen=True)
class SphericalHarmonicBasis:
    """
    Real harmonics up to ``max_degree`` tabulated on a product quadrature:
    Gauss-Legendre in ``cos(polar)`` with ``L + 1`` nodes times a uniform
    azimuthal grid of ``2L + 2`` points. The rule integrates products of two
    basis functions exactly.
    """

    max_degree: int

    def __post_init__(self):
        if not 0 <= self.max_degree <= MAX_SUPPORTED_DEGREE:
            raise ValueError(
                f"max_degree must lie in [0, {MAX_SUPPORTED_DEGREE}], got {self.max_degree}"
            )

    @property
    def size(self) -> int:
        return coefficient_count(self.max_degree)

    @cached_property
    def nodes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened ``(polar, azimuth, weight)`` of the quadrature."""
        x, w = legendre.leggauss(self.max_degree + 1)
        azimuth_count = 2 * self.max_degree + 2
        azimuth = 2.0 * math.pi * np.arange(azimuth_count) / azimuth_count
        polar = np.arccos(x)
        polar_grid, azimuth_grid = np.meshgrid(polar, azimuth, indexing="ij")
        weight = np.repeat(w, azimuth_count) * (2.0 * math.pi / azimuth_count)
        return polar_grid.ravel(), azimuth_grid.ravel(), weight

    @cached_property
    def table(self) -> np.ndarray:
        polar, azimuth, _ = self.nodes
        return harmonics_matrix(self.max_degree, polar, azimuth)

    def gram(self) -> np.ndarray:
        """``<y_j, y_k>_{L^2(S^2)}`` under the quadrature."""
        _, _, weight = self.nodes
        return self.table.T @ (weight[:, None] * self.table)

    def orthonormality_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(self.size))))

    def analyze(self, samples: np.ndarray) -> np.ndarray:
        """Coefficients of a function sampled on the quadrature nodes."""
        _, _, weight = self.nodes
        return self.table.T @ (weight * np.asarray(samples))

    def evaluate(self, coefficients: np.ndarray, polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
        coefficients = np.asarray(coefficients)
        if coefficients.shape[0] != self.size:
            raise ValueError(f"Expected {self.size} coefficients, got {coefficients.shape[0]}")
        return harmonics_matrix(self.max_degree, polar, azimuth) @ coefficients

    def laplacian_residual(self) -> float:
        """
        Largest relative defect of ``-Lap_{S^2} y_{l,n} = l(l+1) y_{l,n}``.

        The azimuthal factor contributes ``-m^2`` exactly; the polar part is
        checked through ``p = P_l^m / (1 - x^2)^{m/2}``, a polynomial of degree
        ``l - m`` that must satisfy
        ``(1 - x^2) p'' - 2(m+1) x p' + (l(l+1) - m(m+1)) p = 0``.
        The polynomial is recovered exactly by a Legendre fit on the nodes
        and differentiated as a series.
        """
        x, _ = legendre.leggauss(self.max_degree + 1)
        worst = 0.0
        for degree in range(self.max_degree + 1):
            eigenvalue = degree * (degree + 1)
            for order in range(degree + 1):
                p = lpmv(order, degree, x) / (1.0 - x**2) ** (order / 2.0)
                series = legendre.legfit(x, p, degree - order)
                p_val = legendre.legval(x, series)
                dp = legendre.legval(x, legendre.legder(series, 1))
                ddp = legendre.legval(x, legendre.legder(series, 2))
                operator = (1.0 - x**2) * ddp - 2.0 * (order + 1) * x * dp - order * (order + 1) * p_val
                scale = max(float(np.max(np.abs(eigenvalue * p_val))), float(np.max(np.abs(p_val))))
                worst = max(worst, float(np.max(np.abs(operator + eigenvalue * p_val))) / scale)
        return worst
