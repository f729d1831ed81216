from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def smooth_step(x: ArrayLike) -> np.ndarray:
    """
    C^inf step: 0 for ``x <= 0``, 1 for ``x >= 1``,
    ``e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`` in between.

    Satisfies ``smooth_step(x) + smooth_step(1 - x) == 1``.
    """
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    # dummy argument outside (0, 1) keeps the exponentials finite
    safe = np.where(inside, x, 0.5)
    left = np.exp(-1.0 / safe)
    right = np.exp(-1.0 / (1.0 - safe))
    return np.where(inside, left / (left + right), np.where(x >= 1, 1.0, 0.0))


@dataclass(frozen=True)
class BumpFunction:
    """
    The fixed dyadic bump.

    ``chi(r) = 1 - smooth_step(r - 1)`` equals 1 on ``[0, 1]`` and vanishes for
    ``r >= 2``. The annular profile ``rho(r) = chi(r) - chi(2r)`` is supported in
    ``1/2 < r < 2`` and its dyadic dilates telescope, so
    ``sum_k rho(r / 2^k) = 1`` for every ``r > 0``. The low-frequency profile is
    ``rho_low = chi`` with ``rho_low(0) = 1``.
    """

    identifier: str = "exp-cutoff-telescoping"

    def chi(self, r: ArrayLike) -> np.ndarray:
        return 1.0 - smooth_step(np.abs(np.asarray(r, dtype=float)) - 1.0)

    def rho(self, r: ArrayLike) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        return self.chi(r) - self.chi(2.0 * r)

    def rho_low(self, r: ArrayLike) -> np.ndarray:
        return self.chi(r)

    def dyadic_sum(self, r: ArrayLike, k_min: int, k_max: int) -> np.ndarray:
        """``sum_{k_min <= k <= k_max} rho(r / 2^k)``."""
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for k in range(k_min, k_max + 1):
            total = total + self.rho(r / 2.0**k)
        return total


DEFAULT_BUMP = BumpFunction()


@dataclass(frozen=True, order=True)
class DyadicScale:
    """A scale ``2^exponent``."""

    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent:
            raise ValueError(f"Dyadic exponent must be an integer, got {self.exponent}")
        object.__setattr__(self, "exponent", int(self.exponent))

    @property
    def value(self) -> float:
        return math.ldexp(1.0, self.exponent)

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"DyadicScale(2^{self.exponent})"

    @classmethod
    def of(cls, value: Union["DyadicScale", float, int]) -> "DyadicScale":
        """Accept a scale or a float that is exactly a power of two."""
        if isinstance(value, DyadicScale):
            return value
        value = float(value)
        if not value > 0 or not math.isfinite(value):
            raise ValueError(f"Dyadic scale must be positive, got {value}")
        mantissa, exponent = math.frexp(value)
        if mantissa != 0.5:
            raise ValueError(f"{value} is not a power of two")
        return cls(exponent - 1)

    def halve(self) -> "DyadicScale":
        return DyadicScale(self.exponent - 1)

    def double(self) -> "DyadicScale":
        return DyadicScale(self.exponent + 1)

    def octaves_to(self, other: "DyadicScale") -> int:
        return abs(self.exponent - DyadicScale.of(other).exponent)


def dyadic_range(low: float, high: float) -> Iterator[DyadicScale]:
    """Powers of two in ``[low, high]``, both ends included when dyadic."""
    scale = DyadicScale(math.ceil(math.log2(low)))
    while scale.value <= high:
        yield scale
        scale = scale.double()
