import math
from typing import Optional, Sequence

import numpy as np

from dwlab.angular.harmonics import real_harmonic, to_spherical
from dwlab.angular.projections import hn_support, hn_weights
from dwlab.angular.shells import ShellAnalysis, shell_analysis
from dwlab.angular.spectrum import AngularSpectrum, SpectrumTerm
from dwlab.grid.fields import Domain, ScalarField, SpinorField
from dwlab.grid.spec import GridSpec
from dwlab.grid.transforms import fft_inverse
from dwlab.multiplier.bump import DEFAULT_BUMP, BumpFunction, DyadicScale


def synthesize(spectrum: AngularSpectrum, grid: GridSpec) -> ScalarField:
    """
    Sample ``sum c_{l,n} g_{l,n}(|x|) y_{l,n}(x / |x|)`` on the grid.

    Directions are taken about ``x = 0``; the origin itself uses the pole.
    """
    x1, x2, x3 = grid.mesh()
    x1, x2, x3 = np.broadcast_arrays(x1, x2, x3)
    radius = np.sqrt(x1**2 + x2**2 + x3**2)
    polar, azimuth = to_spherical(x1, x2, x3)
    values = np.zeros(grid.shape, dtype=np.complex128)
    for term in spectrum:
        profile = term.profile()
        values += (
            term.coefficient
            * profile(radius, term.degree)
            * real_harmonic(term.degree, term.n, polar, azimuth)
        )
    return ScalarField(grid=grid, values=values)


def spectral_values(
    spectrum: AngularSpectrum,
    grid: GridSpec,
    analysis: Optional[ShellAnalysis] = None,
    margin: int = 0,
) -> np.ndarray:
    """
    ``f^(xi) = sum c g(|xi|) y(xi / |xi|)`` on the lattice, each term kept only
    on shells whose fit resolves its degree plus ``margin``.
    """
    analysis = analysis or shell_analysis(grid)
    xi1, xi2, xi3 = np.broadcast_arrays(*grid.frequency_mesh())
    polar, azimuth = to_spherical(xi1, xi2, xi3)
    radius = grid.frequency_norm
    values = np.zeros(grid.shape, dtype=np.complex128)
    flat = values.reshape(-1)
    for term in spectrum:
        radial = term.profile()(radius, term.degree)
        support = np.flatnonzero(analysis.resolved_mask(term.degree, margin) & (radial != 0))
        polar_s, azimuth_s = polar.flat[support], azimuth.flat[support]
        flat[support] += (
            term.coefficient
            * radial.flat[support]
            * real_harmonic(term.degree, term.n, polar_s, azimuth_s)
        )
    return values


def synthesize_spectral(
    spectrum: AngularSpectrum,
    grid: GridSpec,
    analysis: Optional[ShellAnalysis] = None,
    margin: int = 0,
) -> ScalarField:
    """
    Physical field whose continuum transform is :func:`spectral_values`.

    Its angular content is known exactly on the lattice, so ``H_N`` acts on
    it by the weight table alone.
    """
    f_hat = ScalarField(
        grid=grid,
        values=spectral_values(spectrum, grid, analysis, margin),
        domain=Domain.FREQUENCY,
    )
    return fft_inverse(f_hat)


def synthesize_spinor(
    spectra: Sequence[AngularSpectrum],
    grid: GridSpec,
    analysis: Optional[ShellAnalysis] = None,
    margin: int = 1,
) -> SpinorField:
    """Four spectrally synthesised components."""
    if len(spectra) != 4:
        raise ValueError(f"A spinor needs 4 component spectra, got {len(spectra)}")
    return SpinorField.from_components(
        [synthesize_spectral(s, grid, analysis, margin) for s in spectra]
    )


def random_localized_spectrum(
    scale: float,
    N: float,
    rng: np.random.Generator,
    max_degree: int = 16,
    bump: BumpFunction = DEFAULT_BUMP,
) -> AngularSpectrum:
    """
    Random coefficients on the degrees of ``H_N``, weighted by the ``H_N``
    table, with the annular profile ``rho(|xi| / lambda)``: spectrally
    synthesised, this is ``P_lambda H_N g`` for a random ``g``.
    """
    lam = DyadicScale.of(scale).value
    weights = hn_weights(N, bump)
    spectrum = AngularSpectrum(max_degree=max_degree)
    for degree in hn_support(N, max_degree, bump):
        w = float(weights(np.array([degree]))[0])
        for n in range(2 * degree + 1):
            c = complex(rng.standard_normal(), rng.standard_normal()) * w
            spectrum.terms.append(SpectrumTerm(degree, n, c, "annulus", {"scale": lam}))
    return spectrum


def concentration_witness(
    scale: float,
    N: float,
    max_degree: int = 16,
    bump: BumpFunction = DEFAULT_BUMP,
) -> AngularSpectrum:
    """
    Zonal spectrum ``sum_l w_N(l) sqrt(2l+1) y_{l,0}``: the ``H_N`` piece of a
    kernel concentrated around the ``xi_3`` direction.
    """
    lam = DyadicScale.of(scale).value
    weights = hn_weights(N, bump)
    spectrum = AngularSpectrum(max_degree=max_degree)
    for degree in hn_support(N, max_degree, bump):
        w = float(weights(np.array([degree]))[0])
        spectrum.terms.append(
            SpectrumTerm(degree, degree, w * math.sqrt(2 * degree + 1), "annulus", {"scale": lam})
        )
    return spectrum
