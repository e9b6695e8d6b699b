"""
Fourier transforms, multipliers and quadratures on periodic grids

Convention: F(eta) = int f(y) e^{-i y eta} dy, discretized as
h * sum_j f(x_j) e^{-i x_j eta_k}; inverse (1/2pi) (pi/L) sum_k F_k e^{i x eta_k}.
"""
import logging
from typing import Callable, Union

import numpy as np
from scipy import fft as sfft

from models.errors import GridMismatch, NonFiniteMultiplier
from models.field import ComplexField, Grid1D, SpectralField

logger = logging.getLogger(__name__)

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def _alternating_sign(grid: Grid1D) -> np.ndarray:
    # e^{-i x_j eta_k} = (-1)^k e^{-2 pi i j k / N} because x_0 = -L
    return np.where(grid.mode_indices % 2 == 0, 1.0, -1.0)


def to_spectral(f: ComplexField) -> SpectralField:
    """Forward transform with the e^{-iy eta} sign convention."""
    grid = f.grid
    coefficients = grid.spacing * _alternating_sign(grid) * sfft.fftshift(sfft.fft(f.samples))
    return SpectralField(grid, coefficients)


def to_physical(F: SpectralField) -> ComplexField:
    """Inverse of to_spectral."""
    grid = F.grid
    samples = sfft.ifft(sfft.ifftshift(F.coefficients * _alternating_sign(grid))) / grid.spacing
    return ComplexField(grid, samples)


def evaluate_multiplier(grid: Grid1D, m: Multiplier) -> np.ndarray:
    values = m(grid.wavenumbers) if callable(m) else np.asarray(m)
    values = np.broadcast_to(np.asarray(values, dtype=complex), (grid.count,))
    if not np.all(np.isfinite(values)):
        bad = grid.wavenumbers[~np.isfinite(values)]
        raise NonFiniteMultiplier(f"multiplier not finite at {bad.size} frequencies (first eta={bad[0]:.6g})")
    return values


def apply_multiplier(f: ComplexField, m: Multiplier) -> ComplexField:
    """Return to_physical(m(eta_k) * to_spectral(f))."""
    values = evaluate_multiplier(f.grid, m)
    spectrum = to_spectral(f)
    return to_physical(spectrum.replace(spectrum.coefficients * values))


def derivative(f: ComplexField, order: int = 1) -> ComplexField:
    """Spectral derivative d^order/dx^order."""
    return apply_multiplier(f, lambda eta: (1j * eta) ** order)


def shift(f: ComplexField, offset: float) -> ComplexField:
    """Periodic translate: returns samples of f(x - offset)."""
    return apply_multiplier(f, lambda eta: np.exp(-1j * eta * offset))


def refine(f: ComplexField, factor: int = 2) -> ComplexField:
    """Band-limited upsampling by zero padding in the transform domain."""
    grid = f.grid
    fine = Grid1D(grid.half_length, grid.count * factor)
    padded = np.zeros(fine.count, dtype=complex)
    offset = (fine.count - grid.count) // 2
    padded[offset:offset + grid.count] = to_spectral(f).coefficients
    return to_physical(SpectralField(fine, padded))


def _check_same_grid(f: ComplexField, g: ComplexField) -> None:
    if f.grid != g.grid:
        raise GridMismatch(f"grids differ: {f.grid} vs {g.grid}")


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(f.grid.spacing * np.sum(np.abs(f.samples) ** 2)))


def mass(f: ComplexField) -> complex:
    return complex(f.grid.spacing * np.sum(f.samples))


def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """<f, g> = h sum conj(f_j) g_j."""
    _check_same_grid(f, g)
    return complex(f.grid.spacing * np.vdot(f.samples, g.samples))


def direct_transform(f: ComplexField) -> SpectralField:
    """O(N^2) transform by explicit summation (reference for small grids)."""
    grid = f.grid
    phases = np.exp(-1j * np.outer(grid.wavenumbers, grid.nodes))
    return SpectralField(grid, grid.spacing * phases @ f.samples)


def dealias_mask(grid: Grid1D, fraction: float) -> np.ndarray:
    """1 on |eta| <= fraction * max|eta|, 0 elsewhere."""
    eta = grid.wavenumbers
    return (np.abs(eta) <= fraction * np.max(np.abs(eta))).astype(float)
