from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)

IDENTITY_2 = np.eye(2, dtype=np.complex128)
IDENTITY_4 = np.eye(4, dtype=np.complex128)

# Minkowski metric diag(1, -1, -1, -1)
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=np.complex128)
    matrix.flags.writeable = False
    return matrix


@dataclass(frozen=True, eq=False)
class GammaSet:
    """
    Dirac matrices in the standard representation:
    ``gamma^0 = diag(I, -I)`` and ``gamma^j = [[0, sigma^j], [-sigma^j, 0]]``.
    """

    matrices: Tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self):
        gamma0 = np.kron(np.diag([1.0, -1.0]), IDENTITY_2)
        spatial = [np.kron(np.array([[0.0, 1.0], [-1.0, 0.0]]), sigma) for sigma in PAULI]
        object.__setattr__(self, "matrices", tuple(_frozen(g) for g in [gamma0, *spatial]))

    def __getitem__(self, mu: int) -> np.ndarray:
        return self.matrices[mu]

    def __iter__(self):
        return iter(self.matrices)

    @property
    def gamma0(self) -> np.ndarray:
        return self.matrices[0]

    @property
    def pauli(self) -> Tuple[np.ndarray, ...]:
        return PAULI

    def anticommutator(self, mu: int, nu: int) -> np.ndarray:
        return self[mu] @ self[nu] + self[nu] @ self[mu]

    def anticommutation_defect(self) -> float:
        """``max |{gamma^mu, gamma^nu} - 2 g^{mu nu} I|`` over all pairs; exactly 0."""
        return max(
            float(np.max(np.abs(self.anticommutator(mu, nu) - 2.0 * METRIC[mu, nu] * IDENTITY_4)))
            for mu in range(4)
            for nu in range(4)
        )


GAMMA = GammaSet()


def gamma_products(gammas: GammaSet = GAMMA) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``gamma^0 gamma^j`` for ``j = 1, 2, 3`` (the Dirac alpha matrices)."""
    return tuple(_frozen(gammas.gamma0 @ gammas[j]) for j in (1, 2, 3))
