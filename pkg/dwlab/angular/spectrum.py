from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from dwlab.angular.harmonics import MAX_SUPPORTED_DEGREE
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction

RadialProfile = Callable[[np.ndarray, int], np.ndarray]


def _gaussian(width: float = 1.0) -> RadialProfile:
    if not width > 0:
        raise ValueError(f"Gaussian width must be positive, got {width}")

    def profile(r: np.ndarray, degree: int) -> np.ndarray:
        return r**degree * np.exp(-(r**2) / (2.0 * width**2))

    return profile


def _annulus(scale: float = 1.0, bump: BumpFunction = DEFAULT_BUMP) -> RadialProfile:
    if not scale > 0:
        raise ValueError(f"Annulus scale must be positive, got {scale}")

    def profile(r: np.ndarray, degree: int) -> np.ndarray:
        return bump.rho(r / scale)

    return profile


def _shell(radius: float = 1.0, width: float = 0.5) -> RadialProfile:
    if not width > 0:
        raise ValueError(f"Shell width must be positive, got {width}")

    def profile(r: np.ndarray, degree: int) -> np.ndarray:
        return np.exp(-((r - radius) ** 2) / (2.0 * width**2))

    return profile


RADIAL_PROFILES: Dict[str, Callable[..., RadialProfile]] = {
    "gaussian": _gaussian,
    "annulus": _annulus,
    "shell": _shell,
}


def radial_profile(profile_id: str, params: Optional[Dict[str, Any]] = None) -> RadialProfile:
    """
    Build a radial profile ``g(r, l)`` by name.

    ``gaussian``: ``r^l exp(-r^2 / 2w^2)`` (``width``); ``annulus``: ``rho(r / scale)``
    (``scale``); ``shell``: ``exp(-(r - r0)^2 / 2w^2)`` (``radius``, ``width``).
    """
    if profile_id not in RADIAL_PROFILES:
        raise ValueError(
            f"Unknown radial profile {profile_id!r}, expected one of {sorted(RADIAL_PROFILES)}"
        )
    return RADIAL_PROFILES[profile_id](**(params or {}))


@dataclass
class SpectrumTerm:
    degree: int
    n: int
    coefficient: complex
    profile_id: str = "gaussian"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.degree < 0 or not 0 <= self.n <= 2 * self.degree:
            raise ValueError(f"No harmonic with l={self.degree}, n={self.n}")
        self.coefficient = complex(self.coefficient)

    def profile(self) -> RadialProfile:
        return radial_profile(self.profile_id, self.params)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "l": self.degree,
            "n": self.n,
            "coeff_re": self.coefficient.real,
            "coeff_im": self.coefficient.imag,
            "radial_profile_id": self.profile_id,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SpectrumTerm":
        return cls(
            degree=int(data["l"]),
            n=int(data["n"]),
            coefficient=complex(data.get("coeff_re", 0.0), data.get("coeff_im", 0.0)),
            profile_id=data.get("radial_profile_id", "gaussian"),
            params=data.get("params", {}),
        )


@dataclass
class AngularSpectrum:
    """
    A finite sum ``sum c_{l,n} g_{l,n}(r) y_{l,n}(omega)``.

    Args:
        terms (:obj:`List[SpectrumTerm]`): the synthesis terms.
        max_degree (:obj:`int`, `optional`, defaults to 32): the basis cut-off;
            terms beyond it are rejected.
    """

    terms: List[SpectrumTerm] = field(default_factory=list)
    max_degree: int = MAX_SUPPORTED_DEGREE

    def __post_init__(self):
        if not 0 <= self.max_degree <= MAX_SUPPORTED_DEGREE:
            raise ValueError(
                f"max_degree must lie in [0, {MAX_SUPPORTED_DEGREE}], got {self.max_degree}"
            )
        for term in self.terms:
            self._check(term)

    def _check(self, term: SpectrumTerm):
        if term.degree > self.max_degree:
            raise ValueError(
                f"Degree {term.degree} is beyond the basis (max_degree={self.max_degree})"
            )

    def add(self, degree: int, n: int, coefficient: complex, profile_id: str = "gaussian", **params) -> "AngularSpectrum":
        term = SpectrumTerm(degree, n, coefficient, profile_id, params)
        self._check(term)
        self.terms.append(term)
        return self

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def degrees(self) -> List[int]:
        return sorted({t.degree for t in self.terms})

    def top_degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def restricted(self, degrees) -> "AngularSpectrum":
        degrees = set(degrees)
        return AngularSpectrum([t for t in self.terms if t.degree in degrees], self.max_degree)

    def scaled(self, weights: Callable[[int], float]) -> "AngularSpectrum":
        """Multiply each coefficient by ``weights(l)``; zero-weight terms are dropped."""
        terms = []
        for t in self.terms:
            w = float(weights(t.degree))
            if w != 0.0:
                terms.append(SpectrumTerm(t.degree, t.n, t.coefficient * w, t.profile_id, dict(t.params)))
        return AngularSpectrum(terms, self.max_degree)

    def degree_norms_squared(self) -> Dict[int, float]:
        """``sum_n |c_{l,n}|^2`` per degree, meaningful when every term shares one profile."""
        norms: Dict[int, float] = {}
        for t in self.terms:
            norms[t.degree] = norms.get(t.degree, 0.0) + abs(t.coefficient) ** 2
        return norms

    def to_list(self) -> List[Dict[str, Any]]:
        return [t.to_dict() for t in self.terms]

    def to_dict(self) -> Dict[str, Any]:
        return {"max_degree": self.max_degree, "terms": self.to_list()}

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)

    @classmethod
    def from_json(cls, text: str, max_degree: int = MAX_SUPPORTED_DEGREE) -> "AngularSpectrum":
        return cls.from_list(json.loads(text), max_degree)

    @classmethod
    def from_list(cls, terms: List[Dict[str, Any]], max_degree: int = MAX_SUPPORTED_DEGREE) -> "AngularSpectrum":
        return cls([SpectrumTerm.from_dict(d) for d in terms], max_degree)
