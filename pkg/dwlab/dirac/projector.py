from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Union

import numpy as np

from dwlab.common.log import get_logger
from dwlab.common.utils import NumericalError, coerce_sign
from dwlab.dirac.gamma import GAMMA, IDENTITY_4, gamma_products
from dwlab.grid.fields import Domain, SpinorField
from dwlab.grid.spec import GridSpec

logger = get_logger(__name__)

# constructor tolerance for Hermiticity and trace
ALGEBRA_TOLERANCE = 1e-12


def japanese_bracket(grid: GridSpec, mass: float) -> np.ndarray:
    """``<xi>_m = sqrt(m^2 + |xi|^2)`` on the lattice."""
    if not mass > 0:
        raise ValueError(f"Dirac mass must be positive, got {mass}")
    return np.sqrt(mass**2 + grid.frequency_norm**2)


def _symbol(grid: GridSpec, mass: float, theta: int) -> np.ndarray:
    alphas = gamma_products()
    bracket = japanese_bracket(grid, mass)
    xi = np.broadcast_arrays(*grid.frequency_mesh())
    hamiltonian = mass * GAMMA.gamma0[:, :, None, None, None] * np.ones(grid.shape)
    for alpha, component in zip(alphas, xi):
        hamiltonian = hamiltonian + alpha[:, :, None, None, None] * component
    return 0.5 * (IDENTITY_4[:, :, None, None, None] + theta * hamiltonian / bracket)


@dataclass(frozen=True, eq=False)
class DiracProjector:
    """
    Tabulated ``Pi_theta(xi) = (I + theta (xi_j gamma^0 gamma^j + m gamma^0) / <xi>_m) / 2``.

    ``matrices`` has shape ``(4, 4) + grid.shape``. Construction asserts
    Hermiticity and ``tr Pi = 2`` at every lattice point.
    """

    grid: GridSpec
    mass: float
    theta: int
    matrices: np.ndarray

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=np.complex128)
        if matrices.shape != (4, 4) + self.grid.shape:
            raise ValueError(f"Projector table must have shape (4, 4) + grid.shape, got {matrices.shape}")
        hermitian = float(np.max(np.abs(matrices - np.conj(np.swapaxes(matrices, 0, 1)))))
        trace = float(np.max(np.abs(np.einsum("aa...->...", matrices) - 2.0)))
        if hermitian > ALGEBRA_TOLERANCE or trace > ALGEBRA_TOLERANCE:
            raise NumericalError(
                f"Projector table is not a rank-2 Hermitian projector "
                f"(hermiticity {hermitian:.2e}, trace {trace:.2e})"
            )
        matrices.flags.writeable = False
        object.__setattr__(self, "matrices", matrices)

    def at(self, index) -> np.ndarray:
        """The 4x4 matrix at a lattice position given in FFT array order."""
        return self.matrices[(slice(None), slice(None)) + tuple(index)]


@lru_cache(maxsize=16)
def _cached_projector(grid: GridSpec, mass: float, theta: int) -> DiracProjector:
    logger.debug(f"Tabulating Pi_{theta:+d} on M={grid.points_per_axis}, m={mass:g}")
    return DiracProjector(grid=grid, mass=mass, theta=theta, matrices=_symbol(grid, mass, theta))


def build_projector(grid: GridSpec, mass: float, theta: Union[int, str]) -> DiracProjector:
    """
    Dirac projection ``Pi_theta`` on the lattice of ``grid``, cached per
    ``(grid, mass, theta)``.

    Args:
        grid (:obj:`GridSpec`): the lattice.
        mass (:obj:`float`): ``m > 0``.
        theta (:obj:`int` or :obj:`str`): ``+1``/``-1`` or ``"+"``/``"-"``.
    """
    if not mass > 0:
        raise ValueError(f"Dirac mass must be positive, got {mass}")
    return _cached_projector(grid, float(mass), coerce_sign(theta))


def apply_projector(psi: SpinorField, projector: DiracProjector) -> SpinorField:
    """``F[Pi psi](xi) = Pi(xi) psi^(xi)``."""
    if psi.grid != projector.grid:
        raise ValueError(f"Projector built on {projector.grid}, spinor on {psi.grid}")
    psi._require(Domain.PHYSICAL)
    spectrum = np.einsum("ab...,b...->a...", projector.matrices, psi.spectrum())
    return SpinorField.from_spectrum(psi.grid, spectrum)


def projector_defects(grid: GridSpec, mass: float) -> Dict[str, float]:
    """
    Worst pointwise deviations of the projector algebra on the lattice:
    ``Pi^2 - Pi``, ``Pi_+ Pi_-``, ``Pi_+ + Pi_- - I``, ``Pi - Pi^dagger`` and
    ``tr Pi - 2``, maximised over both signs.
    """
    plus = build_projector(grid, mass, 1).matrices
    minus = build_projector(grid, mass, -1).matrices
    identity = IDENTITY_4[:, :, None, None, None]

    def product(a, b):
        return np.einsum("ab...,bc...->ac...", a, b)

    def worst(values):
        return float(np.max(np.abs(values)))

    return {
        "idempotence": max(worst(product(plus, plus) - plus), worst(product(minus, minus) - minus)),
        "annihilation": max(worst(product(plus, minus)), worst(product(minus, plus))),
        "completeness": worst(plus + minus - identity),
        "hermiticity": max(
            worst(p - np.conj(np.swapaxes(p, 0, 1))) for p in (plus, minus)
        ),
        "trace": max(worst(np.einsum("aa...->...", p) - 2.0) for p in (plus, minus)),
    }
