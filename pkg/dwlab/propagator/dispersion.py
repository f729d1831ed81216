from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from dwlab.grid.spec import GridSpec


class LawKind(Enum):
    WAVE = "wave"
    KLEIN_GORDON = "klein_gordon"


@dataclass(frozen=True)
class DispersionLaw:
    """
    Dispersion relation ``h(xi)`` of a half-wave flow: ``|xi|`` for the wave
    equation, ``sqrt(m^2 + |xi|^2)`` for Klein-Gordon with mass ``m > 0``.
    """

    kind: LawKind = LawKind.WAVE
    mass: float = 0.0

    def __post_init__(self):
        kind = LawKind(self.kind)
        object.__setattr__(self, "kind", kind)
        match kind:
            case LawKind.WAVE:
                if self.mass != 0.0:
                    raise ValueError(f"The wave law is massless, got m={self.mass}")
            case LawKind.KLEIN_GORDON:
                if not self.mass > 0:
                    raise ValueError(f"Klein-Gordon needs m > 0, got m={self.mass}")
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def wave(cls) -> "DispersionLaw":
        return cls(LawKind.WAVE)

    @classmethod
    def klein_gordon(cls, mass: float = 1.0) -> "DispersionLaw":
        return cls(LawKind.KLEIN_GORDON, mass)

    @property
    def name(self) -> str:
        if self.kind is LawKind.WAVE:
            return "wave"
        return f"klein_gordon(m={self.mass:g})"

    def evaluate(self, xi_norm: np.ndarray) -> np.ndarray:
        xi_norm = np.asarray(xi_norm, dtype=float)
        if self.kind is LawKind.WAVE:
            return xi_norm
        return np.sqrt(self.mass**2 + xi_norm**2)

    def symbol(self, grid: GridSpec) -> np.ndarray:
        """``h(xi)`` on the frequency lattice."""
        return self.evaluate(grid.frequency_norm)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mass": self.mass}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DispersionLaw":
        return cls(LawKind(data.get("kind", "wave")), float(data.get("mass", 0.0)))


WAVE = DispersionLaw.wave()
