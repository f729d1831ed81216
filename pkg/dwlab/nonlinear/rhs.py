from typing import Tuple, Union

import numpy as np

from dwlab.common.utils import coerce_sign
from dwlab.dirac.projector import DiracProjector, apply_projector
from dwlab.grid.fields import ScalarField, SpinorField
from dwlab.nonlinear.null_forms import NullFormKind, dealias, dealiased_product, null_form
from dwlab.nonlinear.potentials import inverse_derivative, yukawa_convolve
from dwlab.propagator.dispersion import WAVE


def spinor_pairing(phi: SpinorField, psi: SpinorField) -> ScalarField:
    """``phi^dagger psi = sum_a conj(phi_a) psi_a``, dealiased."""
    phi.check_compatible(psi)
    density = None
    for a in range(psi.components):
        term = dealiased_product(phi.component(a).conj(), psi.component(a))
        density = term if density is None else density + term
    return density


def spinor_density(psi: SpinorField) -> ScalarField:
    """
    ``psi^dagger psi = sum_a |P psi_a|^2`` with ``P`` the two-thirds truncation.

    The squares are taken pointwise and the product spectrum is left unmasked,
    so the density is real and nonnegative on the grid. Aliasing of the squares
    only reaches indices ``|n_i| >= M / 3``, which every later product drops.
    """
    density = sum(np.abs(dealias(psi.component(a)).values) ** 2 for a in range(psi.components))
    return ScalarField(grid=psi.grid, values=density + 0j)


def hartree_term(psi: SpinorField, b: float) -> SpinorField:
    """``(V_b * psi^dagger psi) psi``."""
    potential = yukawa_convolve(spinor_density(psi), b)
    # the density is real; drop round-off imaginary parts
    potential = potential.with_values(np.real(potential.values))
    return dealiased_product(potential, psi)


def dirac_rhs(psi: SpinorField, b: float, projector: DiracProjector) -> SpinorField:
    """``Pi_theta [(V_b * psi^dagger psi) psi]``."""
    if psi.grid != projector.grid:
        raise ValueError(f"Projector built on {projector.grid}, spinor on {psi.grid}")
    return apply_projector(hartree_term(psi, b), projector)


def wave_rhs(
    u_plus: ScalarField,
    u_minus: ScalarField,
    kind: Union[str, NullFormKind],
    coupling: float = 1.0,
) -> Tuple[ScalarField, ScalarField]:
    """
    Forcing ``(F_+, F_-)`` of the reduced half-wave system
    ``(-i d_t + theta |D|) u_theta = theta * coupling * |D|^{-2} Q(u_bar, u)``
    with ``u = u_+ + u_-`` and ``d_t u = -i |D| (u_+ - u_-)``.

    ``coupling = 1`` follows the reduced system; ``1/2`` is the split of the
    source ``|D|^{-1} Q`` of the second-order equation.
    """
    u_plus.check_compatible(u_minus)
    kind = NullFormKind.parse(kind)
    u = u_plus + u_minus
    if kind.is_q0:
        u_t = (u_plus - u_minus).apply_symbol(-1j * WAVE.symbol(u.grid))
        q = null_form(u.conj(), u, kind, u_t.conj(), u_t)
    else:
        q = null_form(u.conj(), u, kind)
    # Q(u_bar, u) generally has a zero mode; solves would log it every frame
    base = inverse_derivative(q, 2.0, warn=False) * coupling
    return tuple(base * float(coerce_sign(theta)) for theta in (1, -1))
