import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from dwlab.common.log import get_logger
from dwlab.common.utils import coerce_sign, stable_seed
from dwlab.grid.fields import Domain, FieldType, ScalarField, SpinorField, spatial_fft, spatial_ifft
from dwlab.grid.norms import lebesgue_norm
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import derivative_symbol
from dwlab.normbench.report import ProbeReport
from dwlab.propagator.dispersion import WAVE, DispersionLaw

logger = get_logger(__name__)

NULL_SYMBOL_ESTIMATE = "|Q_ij^(xi, eta)| <~ angle(xi, eta) |xi| |eta|"


@dataclass(frozen=True)
class NullFormKind:
    """
    ``Q_ij(u, v) = d_i u d_j v - d_j u d_i v`` (``1 <= i < j <= 3``) or
    ``Q_0(u, v) = d_t u d_t v - grad u . grad v`` (``i = j = 0``).
    """

    i: int = 0
    j: int = 0

    def __post_init__(self):
        if (self.i, self.j) != (0, 0) and not 1 <= self.i < self.j <= 3:
            raise ValueError(f"Q_ij needs 1 <= i < j <= 3, got i={self.i}, j={self.j}")

    @classmethod
    def q(cls, i: int, j: int) -> "NullFormKind":
        return cls(i, j)

    @classmethod
    def q0(cls) -> "NullFormKind":
        return cls(0, 0)

    @property
    def is_q0(self) -> bool:
        return self.i == 0

    @property
    def name(self) -> str:
        return "Q0" if self.is_q0 else f"Q{self.i}{self.j}"

    @classmethod
    def parse(cls, value: Union[str, "NullFormKind"]) -> "NullFormKind":
        """``"Q0"``, ``"Q12"``, ``"Q13"`` or ``"Q23"``."""
        if isinstance(value, NullFormKind):
            return value
        match = re.fullmatch(r"[Qq](0|[1-3][1-3])", str(value).strip())
        if match is None:
            raise ValueError(f"Unknown null form {value!r}, expected Q0 or Qij")
        digits = match.group(1)
        if digits == "0":
            return cls.q0()
        return cls.q(int(digits[0]), int(digits[1]))

    def __str__(self) -> str:
        return self.name


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Two-thirds rule: keep lattice indices with every ``|n_i| < M / 3``."""
    keep = np.abs(grid.lattice_indices) < grid.points_per_axis / 3.0
    return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]


def dealias(f: FieldType) -> FieldType:
    return f.apply_symbol(dealias_mask(f.grid))


def dealiased_product(a: FieldType, b: FieldType) -> FieldType:
    """
    Pointwise ``a * b`` with both factors and the product truncated by
    :func:`dealias_mask`. A scalar factor multiplies every spinor component.
    """
    if a.grid != b.grid:
        raise ValueError(f"Grid mismatch: {a.grid} vs {b.grid}")
    a._require(Domain.PHYSICAL)
    b._require(Domain.PHYSICAL)
    mask = dealias_mask(a.grid)
    left = spatial_ifft(spatial_fft(a.values) * mask)
    right = spatial_ifft(spatial_fft(b.values) * mask)
    cls = SpinorField if SpinorField.components in (a.components, b.components) else ScalarField
    product = np.asarray(left * right)
    return cls.from_spectrum(a.grid, spatial_fft(product) * mask)


def free_time_derivative(f: FieldType, law: DispersionLaw = WAVE, theta: Union[int, str] = 1) -> FieldType:
    """``d_t`` of the free wave ``e^{-theta i t h(D)} f`` at ``t = 0``: ``-theta i h(D) f``."""
    return f.apply_symbol(-1j * coerce_sign(theta) * law.symbol(f.grid))


def _derivative(f: FieldType, axis: int) -> FieldType:
    return f.apply_symbol(derivative_symbol(f.grid, axis))


def null_form(
    u: ScalarField,
    v: ScalarField,
    kind: NullFormKind,
    u_t: Optional[ScalarField] = None,
    v_t: Optional[ScalarField] = None,
) -> ScalarField:
    """
    Null form of two scalar fields with spectral derivatives and dealiased products.

    ``Q_0`` needs the time derivatives ``u_t`` and ``v_t`` from the caller,
    e.g. :func:`free_time_derivative` for free waves.
    """
    u.check_compatible(v)
    kind = NullFormKind.parse(kind)
    if kind.is_q0:
        if u_t is None or v_t is None:
            raise ValueError("Q0 needs the time derivatives u_t and v_t")
        u.check_compatible(u_t)
        u.check_compatible(v_t)
        result = dealiased_product(u_t, v_t)
        for axis in range(3):
            result = result - dealiased_product(_derivative(u, axis), _derivative(v, axis))
        return result
    i, j = kind.i - 1, kind.j - 1
    return dealiased_product(_derivative(u, i), _derivative(v, j)) - dealiased_product(
        _derivative(u, j), _derivative(v, i)
    )


def lattice_mode(grid: GridSpec, index: Sequence[int]) -> ScalarField:
    """Unit-modulus plane wave ``e^{i x . xi}`` at the lattice frequency ``(pi / L) * index``."""
    x = grid.mesh()
    xi = np.asarray(index, dtype=float) * grid.frequency_spacing
    return ScalarField(grid=grid, values=np.exp(1j * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2])))


def separated_pair(angle: float, axes: Sequence[int] = (1, 2), ratio: float = 1.0):
    """
    Integer directions ``k e_i`` and ``A e_i + B e_j`` for the 1-based ``axes = (i, j)``,
    with ``angle ~ atan(B / A)`` and ``|(A, B)| ~ ratio * k``. Small angles use ``B = 1``.
    """
    if not 0 < angle <= math.pi / 2:
        raise ValueError(f"Separation angle must lie in (0, pi/2], got {angle}")
    if not ratio > 0:
        raise ValueError(f"Frequency ratio must be positive, got {ratio}")
    k = max(4, int(round(1.0 / (min(1.0, ratio) * math.sin(angle)))))
    first, second = [0, 0, 0], [0, 0, 0]
    first[axes[0] - 1] = k
    second[axes[0] - 1] = int(round(ratio * k * math.cos(angle)))
    second[axes[1] - 1] = max(1, int(round(ratio * k * math.sin(angle))))
    return tuple(first), tuple(second)


def _random_amplitudes(rng: np.random.Generator) -> np.ndarray:
    """Two complex amplitudes for the ``+xi`` and ``-xi`` modes of one factor."""
    return rng.standard_normal(2) + 1j * rng.standard_normal(2)


def null_symbol_probe(
    angles: Sequence[float] = (0.5, 0.25, 0.125, 0.0625),
    scales: Sequence[float] = (8.0, 8.0),
    trials: int = 4,
    kind: NullFormKind = NullFormKind(1, 2),
    seed: int = 0,
) -> ProbeReport:
    """
    Angular gain of ``Q_ij`` on frequency pairs separated by each angle.

    For every angle a grid is built so that the pair from :func:`separated_pair`
    sits on its lattice at ``|xi| = lambda_1``, ``|eta| ~ lambda_2`` and every
    product is alias-free. The first input is the plane-wave pair; each of the
    ``trials`` further inputs superposes the modes ``+xi, -xi`` (and ``+eta, -eta``)
    with random complex amplitudes. ``Q_ij`` has the same symbol modulus on
    antipodal pairs, so the gain persists. The sample is the largest
    ``||Q(u, v)||_2 / (|xi| |eta| ||u||_inf ||v||_2)`` over inputs at the realised
    angle, so a fitted angle exponent near 1 shows the null cancellation.

    Args:
        angles (:obj:`Sequence[float]`): separation angles in ``(0, pi/2]``.
        scales (:obj:`Sequence[float]`): the pair ``(lambda_1, lambda_2)``.
        trials (:obj:`int`): random-amplitude inputs per angle.
        kind (:obj:`NullFormKind`): a ``Q_ij``.
        seed (:obj:`int`): run seed; each angle draws from its own stream.

    Returns:
        :obj:`ProbeReport`: one sample per angle with the realised ``angle``,
        ``lambda_2`` and grid size ``M``.
    """
    kind = NullFormKind.parse(kind)
    if kind.is_q0:
        raise ValueError("The symbol probe measures Q_ij; Q0 is exercised by the trilinear probe")
    lam1, lam2 = (float(value) for value in scales)
    if not (lam1 > 0 and lam2 > 0):
        raise ValueError(f"Frequency pair must be positive, got {tuple(scales)}")
    if trials < 0:
        raise ValueError(f"trials must be >= 0, got {trials}")
    report = ProbeReport(
        name="null_symbol",
        estimate=NULL_SYMBOL_ESTIMATE,
        params={"angles": list(angles), "scales": [lam1, lam2], "trials": trials, "kind": kind.name},
        environment={"seed": seed},
    )
    spread = []
    for angle in angles:
        xi_index, eta_index = separated_pair(angle, (kind.i, kind.j), lam2 / lam1)
        k = xi_index[kind.i - 1]
        top = k + max(abs(c) for c in eta_index)
        points = max(8, 3 * top + 4)
        points += points % 2
        grid = GridSpec(half_period=math.pi * k / lam1, points_per_axis=points)
        xi_modes = (lattice_mode(grid, xi_index), lattice_mode(grid, [-c for c in xi_index]))
        eta_modes = (lattice_mode(grid, eta_index), lattice_mode(grid, [-c for c in eta_index]))
        xi = np.asarray(xi_index) * grid.frequency_spacing
        eta = np.asarray(eta_index) * grid.frequency_spacing
        realized = math.atan2(eta_index[kind.j - 1], eta_index[kind.i - 1])
        symbol_scale = np.linalg.norm(xi) * np.linalg.norm(eta)

        rng = np.random.default_rng(stable_seed(seed, f"null_symbol-{angle!r}"))
        ratios = []
        for trial in range(trials + 1):
            a = np.array([1.0, 0.0]) if trial == 0 else _random_amplitudes(rng)
            c = np.array([1.0, 0.0]) if trial == 0 else _random_amplitudes(rng)
            u = xi_modes[0] * a[0] + xi_modes[1] * a[1]
            v = eta_modes[0] * c[0] + eta_modes[1] * c[1]
            denominator = symbol_scale * lebesgue_norm(u, np.inf) * v.l2_norm()
            if denominator == 0.0:
                report.skipped += 1
                continue
            ratios.append(null_form(u, v, kind).l2_norm() / denominator)
        value = max(ratios)
        report.add_sample(value, angle=realized, lambda_2=float(np.linalg.norm(eta)), M=points)
        report.extras.setdefault("normalized", []).append(value / realized)
        spread.append(min(ratios) / value if value > 0 else 1.0)
    report.extras["trial_spread"] = spread
    report.fit("angle")
    return report
