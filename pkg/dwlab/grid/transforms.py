import numpy as np

from dwlab.grid.fields import Domain, FieldType, spatial_fft, spatial_ifft
from dwlab.grid.spec import GridSpec


def fft_forward(f: FieldType) -> FieldType:
    """
    Continuum-normalised Fourier transform ``f^(xi) = int e^{-i x.xi} f(x) dx``.

    The box origin sits at ``-L``, which contributes the phase ``(-1)^{n1+n2+n3}``;
    the Riemann weight is the cell volume. With this scaling the discrete
    Plancherel identity reads ``||f||^2 = (2 pi)^{-3} sum |f^|^2 (pi/L)^3``.

    Args:
        f (:obj:`ScalarField` or :obj:`SpinorField`): physical-space field.

    Returns:
        A field of the same type with ``domain == Domain.FREQUENCY``.
    """
    f._require(Domain.PHYSICAL)
    grid = f.grid
    values = grid.cell_volume * grid.parity * spatial_fft(f.values)
    return f.with_values(values, domain=Domain.FREQUENCY)


def fft_inverse(f_hat: FieldType) -> FieldType:
    """Inverse of :func:`fft_forward`."""
    f_hat._require(Domain.FREQUENCY)
    grid = f_hat.grid
    values = spatial_ifft(grid.parity * f_hat.values) / grid.cell_volume
    return f_hat.with_values(values, domain=Domain.PHYSICAL)


def derivative_symbol(grid: GridSpec, axis: int) -> np.ndarray:
    """
    ``i xi_axis`` broadcasting to ``grid.shape`` (``axis`` in 0..2), with the
    unpaired Nyquist mode ``n = -M/2`` zeroed.
    """
    if axis not in (0, 1, 2):
        raise ValueError(f"Spatial axis must be 0, 1 or 2, got {axis}")
    wavenumbers = np.where(
        grid.lattice_indices == -grid.points_per_axis // 2, 0.0, grid.wavenumbers
    )
    shape = [1, 1, 1]
    shape[axis] = grid.points_per_axis
    return 1j * wavenumbers.reshape(shape)


def spectral_derivative(f: FieldType, axis: int) -> FieldType:
    """``d f / d x_axis`` by the spectral multiplier."""
    return f.apply_symbol(derivative_symbol(f.grid, axis))
