from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from dwlab.dirac.projector import apply_projector, build_projector
from dwlab.grid.fields import FieldType, ScalarField, SpacetimeField, SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.nonlinear.rhs import hartree_term, wave_rhs
from dwlab.propagator.dispersion import DispersionLaw
from dwlab.propagator.evolution import WaveDataPair, halfwave_decompose
from dwlab.solver.config import PicardConfig

SIGNS = (1, -1)

WaveData = Union[WaveDataPair, Tuple[ScalarField, ScalarField]]


@dataclass(eq=False)
class Solution:
    """Per-sign components ``u_theta(t)`` of a solve; the field itself is their sum."""

    components: Dict[int, SpacetimeField]
    law: DispersionLaw
    system: str

    def __post_init__(self):
        if set(self.components) != set(SIGNS):
            raise ValueError(f"Need components for both signs, got {sorted(self.components)}")
        self.components[1].check_compatible(self.components[-1])

    @property
    def grid(self) -> GridSpec:
        return self.components[1].grid

    @property
    def time_step(self) -> float:
        return self.components[1].time_step

    @property
    def times(self) -> np.ndarray:
        return self.components[1].times

    @property
    def sample_count(self) -> int:
        return self.components[1].sample_count

    def component(self, theta: int) -> SpacetimeField:
        return self.components[theta]

    @property
    def total(self) -> SpacetimeField:
        return self.components[1] + self.components[-1]

    def frame(self, k: int) -> FieldType:
        return self.components[1].frame(k) + self.components[-1].frame(k)


def initial_components(
    data: Union[WaveData, SpinorField], cfg: PicardConfig
) -> Dict[int, FieldType]:
    """
    Half-wave data ``u_+-(0)`` of the wave system (from ``(u, d_t u)`` or given
    directly as a pair), or ``Pi_+- psi_0`` of the Dirac system.
    """
    if cfg.system == "wave_null":
        if isinstance(data, WaveDataPair):
            u_plus, u_minus = halfwave_decompose(data, cfg.law)
        elif isinstance(data, (tuple, list)) and len(data) == 2:
            u_plus, u_minus = data
            u_plus.check_compatible(u_minus)
        else:
            raise ValueError("The wave system takes a WaveDataPair or a (u_plus, u_minus) pair")
        if u_plus.components != 1:
            raise ValueError("The wave system is scalar")
        return {1: u_plus, -1: u_minus}
    if not isinstance(data, SpinorField):
        raise ValueError(f"The Dirac system takes a SpinorField, got {type(data).__name__}")
    return {theta: apply_projector(data, build_projector(data.grid, cfg.mass, theta)) for theta in SIGNS}


def system_forcing(
    components: Dict[int, SpacetimeField], cfg: PicardConfig
) -> Dict[int, SpacetimeField]:
    """
    Right-hand sides ``F_theta(t)`` of ``(-i d_t + theta h(D)) u_theta = F_theta``
    evaluated frame by frame on the current components.
    """
    plus, minus = components[1], components[-1]
    frames: Dict[int, list] = {theta: [] for theta in SIGNS}
    if cfg.system == "wave_null":
        for u_plus, u_minus in zip(plus, minus):
            f_plus, f_minus = wave_rhs(u_plus, u_minus, cfg.null_form, cfg.coupling)
            frames[1].append(f_plus)
            frames[-1].append(f_minus)
    else:
        projectors = {theta: build_projector(plus.grid, cfg.mass, theta) for theta in SIGNS}
        for psi_plus, psi_minus in zip(plus, minus):
            term = hartree_term(psi_plus + psi_minus, cfg.b)
            for theta in SIGNS:
                frames[theta].append(apply_projector(term, projectors[theta]))
    return {theta: SpacetimeField.from_frames(frames[theta], plus.time_step) for theta in SIGNS}


def sup_difference(first: Dict[int, SpacetimeField], second: Dict[int, SpacetimeField]) -> float:
    """``sup_t (sum_theta ||first_theta(t) - second_theta(t)||^2)^{1/2}``."""
    squared = None
    for theta in SIGNS:
        diff = first[theta].frames - second[theta].frames
        axes = tuple(range(1, diff.ndim))
        per_frame = np.sum(np.abs(diff) ** 2, axis=axes) * first[theta].grid.cell_volume
        squared = per_frame if squared is None else squared + per_frame
    return float(np.sqrt(squared.max()))


def data_norm(components: Dict[int, FieldType]) -> float:
    return float(np.sqrt(sum(components[theta].l2_norm() ** 2 for theta in SIGNS)))


def scale_components(components: Dict[int, FieldType], factor: float) -> Dict[int, FieldType]:
    return {theta: components[theta] * factor for theta in SIGNS}
