import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from dwlab.common.utils import atomic_write_text, to_config
from dwlab.nonlinear.null_forms import NullFormKind
from dwlab.propagator.dispersion import WAVE, DispersionLaw

SYSTEMS = ("wave_null", "dirac_hartree")

FINITE_WINDOW_STATEMENT = (
    "Solutions are computed on the finite window [0, T] with T <= L/2. Global existence is "
    "replaced by uniformity in T over this window together with a decreasing scattering diagnostic."
)


@dataclass
class PicardConfig:
    """
    Settings of one small-data Picard solve.

    Args:
        system (:obj:`str`): ``"wave_null"`` (reduced half-wave system with the
            null form ``kind``) or ``"dirac_hartree"`` (Dirac equation with the
            Yukawa-Hartree nonlinearity of range ``b`` and mass ``mass``).
        eps (:obj:`float`): data size; with ``normalize`` the data is rescaled
            to this ``L^2`` norm.
        T (:obj:`float`): window length.
        dt (:obj:`float`): frame spacing.
        max_iter (:obj:`int`): iteration cap, at least 2.
        tol (:obj:`float`): stop once the sup-in-time ``L^2`` difference of
            successive iterates falls below ``tol * ||data||``.
        coupling (:obj:`float`): factor in front of the wave forcing.
        sigma (:obj:`float`): angular regularity of the reported data norm.
        snapshot_dir (:obj:`str`, `optional`): where to dump field snapshots.
        snapshot_stride (:obj:`int`): frame stride of the snapshots; 0 disables them.
    """

    system: str = "wave_null"
    kind: str = "Q12"
    eps: float = 1e-2
    T: float = 8.0
    dt: float = 0.05
    max_iter: int = 20
    tol: float = 1e-10
    mass: float = 1.0
    b: float = 1.0
    coupling: float = 1.0
    sigma: float = 1.0
    normalize: bool = True
    snapshot_dir: Optional[str] = None
    snapshot_stride: int = 0
    name: str = "solve"

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"Unknown system {self.system!r}, expected one of {SYSTEMS}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not 0 < self.dt < self.T:
            raise ValueError(f"dt must lie in (0, T), got {self.dt}")
        if self.max_iter < 2:
            raise ValueError(f"max_iter must be >= 2, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.system == "dirac_hartree":
            if not self.mass > 0:
                raise ValueError(f"mass must be positive, got {self.mass}")
            if not self.b > 0:
                raise ValueError(f"b must be positive, got {self.b}")
        if self.snapshot_stride < 0:
            raise ValueError(f"snapshot_stride must be >= 0, got {self.snapshot_stride}")
        self.kind = NullFormKind.parse(self.kind).name

    @property
    def null_form(self) -> NullFormKind:
        return NullFormKind.parse(self.kind)

    @property
    def law(self) -> DispersionLaw:
        return WAVE if self.system == "wave_null" else DispersionLaw.klein_gordon(self.mass)

    @property
    def times(self) -> np.ndarray:
        count = int(math.ceil(self.T / self.dt - 1e-9)) + 1
        return self.dt * np.arange(count)

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PicardConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"Unknown solver keys: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass
class SolveReport:
    """
    Outcome of a Picard solve.

    ``differences[n]`` is the sup-in-time ``L^2`` distance between iterates
    ``n + 1`` and ``n``; ``ratios`` are the quotients of consecutive differences.
    """

    name: str
    system: str
    config: Dict[str, Any]
    iterations: int = 0
    differences: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    converged: bool = False
    non_contraction: bool = False
    data_norm: float = 0.0
    weighted_data_norm: float = 0.0
    residual: Optional[float] = None
    scattering: Dict[str, Any] = field(default_factory=dict)
    charge_drift: Optional[float] = None
    projector_leakage: Optional[float] = None
    finite_window: str = FINITE_WINDOW_STATEMENT
    snapshots: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def warn(self, message: str):
        if message not in self.warnings:
            self.warnings.append(message)

    def first_correction(self) -> Optional[float]:
        return self.differences[0] if self.differences else None

    def to_dict(self, timestamp: bool = True) -> Dict[str, Any]:
        document = {
            "name": self.name,
            "system": self.system,
            "config": self.config,
            "iterations": self.iterations,
            "differences": self.differences,
            "ratios": self.ratios,
            "converged": self.converged,
            "non_contraction": self.non_contraction,
            "data_norm": self.data_norm,
            "weighted_data_norm": self.weighted_data_norm,
            "residual": self.residual,
            "scattering": self.scattering,
            "charge_drift": self.charge_drift,
            "projector_leakage": self.projector_leakage,
            "finite_window": self.finite_window,
            "snapshots": self.snapshots,
            "warnings": self.warnings,
        }
        if timestamp:
            document["created"] = datetime.now().isoformat(timespec="seconds")
        return to_config(document)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path: Union[str, Path]) -> Path:
        return atomic_write_text(self.to_json(), path)
