"""
Wave packet transform W_phi f(x, xi) = int conj(phi(y - x)) f(y) e^{-iy xi} dy

Physical-side quadrature against grid data or closures, Parseval-side
quadrature against analytic transforms, batched slices over x and the exact
discrete inversion.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft

from config.settings import GAUSS_PANEL_ORDER, WPT_MAX_NODES, WPT_MAX_REFINEMENTS, WPT_RTOL
from models.errors import ContractError, GridMismatch, GridTooCoarse, NoSpectralClosure, UnderResolved
from models.field import ComplexField
from models.results import WptValue
from processing.field import l2_norm, refine, shift
from processing.propagator import WindowSpec, detector_window, detector_window_spectrum, local_grid
from providers.data import DataSource

logger = logging.getLogger(__name__)

Window = Union[WindowSpec, ComplexField]

_CHUNK = 2 ** 20
_SCAN_COUNT = 4097
# integrand magnitudes below this fraction of the peak bound the integration range
_SCAN_FLOOR = 1e-17
_NEGLIGIBLE = 1e-16


@dataclass(frozen=True)
class SpectralWindow:
    """
    Window given by its transform: phi^(eta) = base(eta) e^{i t_w (eta^3 - 3 xi_w eta^2)}.

    flow_time and flow_xi only steer the quadrature spacing.
    """
    spectrum: Callable[[np.ndarray], np.ndarray]
    band: float
    radius: float
    flow_time: float = 0.0
    flow_xi: float = 0.0

    def phase_rate(self, zeta: np.ndarray) -> np.ndarray:
        """d/d zeta of the phase of conj(phi^(zeta))"""
        return -self.flow_time * (3.0 * zeta ** 2 - 6.0 * self.flow_xi * zeta)


def spectral_window(spec: WindowSpec, t0: float = 0.0, xi_eff: float = 0.0) -> SpectralWindow:
    """Scaled window, evolved for criterion (ii) when t0 != 0."""
    if t0 == 0:
        return SpectralWindow(spec.spectrum(), spec.band, spec.radius)
    return SpectralWindow(detector_window_spectrum(spec, t0, xi_eff), spec.band, spec.radius,
                          flow_time=-t0, flow_xi=-xi_eff)


# Adaptive refinement

Rule = Callable[[float], Tuple[complex, float, int]]


def _adaptive(rule: Rule, h0: float, nodes_at: Callable[[float], int]) -> Tuple[complex, float, float]:
    """
    Halve h from h0 until successive values agree to WPT_RTOL * scale.

    Returns:
        (value, error, scale) with error the last successive difference
    """
    if nodes_at(h0) > WPT_MAX_NODES:
        raise UnderResolved(f"quadrature needs {nodes_at(h0)} nodes (limit {WPT_MAX_NODES})")

    h = h0
    value, scale, _ = rule(h)
    error = None
    for _ in range(WPT_MAX_REFINEMENTS):
        if nodes_at(h / 2.0) > WPT_MAX_NODES:
            break
        h /= 2.0
        fine, scale, _ = rule(h)
        error = abs(fine - value)
        value = fine
        if error <= WPT_RTOL * scale:
            break
    if error is None:
        coarse, _, _ = rule(2.0 * h0)
        error = abs(value - coarse)
    return value, float(error), float(scale)


# Physical side

def _check_oscillation(h: float, xi: float) -> None:
    if xi != 0 and h > np.pi / (2.0 * abs(xi)):
        raise UnderResolved(f"spacing {h:.4g} exceeds pi/(2|xi|) = {np.pi / (2.0 * abs(xi)):.4g}")


def _field_wpt(f: ComplexField, window: Window, x: float, xi: float) -> WptValue:
    grid = f.grid
    h = grid.spacing
    _check_oscillation(h, xi)

    y = grid.nodes
    if isinstance(window, ComplexField):
        if window.grid != grid:
            raise GridMismatch(f"window on {window.grid}, data on {grid}")
        placed = shift(window, x).samples
    else:
        L = grid.half_length
        offsets = np.mod(y - x + L, 2.0 * L) - L
        placed = window.profile()(offsets)

    integrand = np.conj(placed) * f.samples * np.exp(-1j * y * xi)
    value = complex(h * np.sum(integrand))
    coarse = complex(2.0 * h * np.sum(integrand[::2]))
    return WptValue(value=value, error=abs(value - coarse), x=x, xi=xi,
                    scale=float(h * np.sum(np.abs(integrand))), path="field")


def _closure_window_wpt(f: DataSource, spec: WindowSpec, x: float, xi: float) -> WptValue:
    f_lo, f_hi = f.physical_extent()
    lo, hi = max(f_lo, x - spec.radius), min(f_hi, x + spec.radius)
    if hi <= lo:
        return WptValue(0j, 0.0, x=x, xi=xi, scale=0.0, path="physical")

    band_f = f.band if np.isfinite(f.band) else spec.band
    h0 = np.pi / (abs(xi) + spec.band + band_f)
    if xi != 0:
        h0 = min(h0, np.pi / (2.0 * abs(xi)))
    profile = spec.profile()
    breaks = [b for b in f.breakpoints if lo < b < hi]

    def integrand(y):
        return np.conj(profile(y - x)) * f.evaluate(y) * np.exp(-1j * y * xi)

    if breaks:
        edges = np.array([lo] + breaks + [hi])
        gl_nodes, gl_weights = np.polynomial.legendre.leggauss(GAUSS_PANEL_ORDER)

        def panels_at(h):
            return int(sum(np.ceil((b - a) / (0.5 * GAUSS_PANEL_ORDER * h)) for a, b in zip(edges[:-1], edges[1:])))

        def rule(h):
            value, scale = 0j, 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                count = int(np.ceil((b - a) / (0.5 * GAUSS_PANEL_ORDER * h)))
                cuts = np.linspace(a, b, count + 1)
                mid = 0.5 * (cuts[1:] + cuts[:-1])[:, None]
                half = 0.5 * (cuts[1:] - cuts[:-1])[:, None]
                y = (mid + half * gl_nodes[None, :]).ravel()
                w = (half * gl_weights[None, :]).ravel()
                g = integrand(y)
                value += np.sum(w * g)
                scale += np.sum(w * np.abs(g))
            return complex(value), float(scale), y.size

        value, error, scale = _adaptive(rule, h0, lambda h: panels_at(h) * GAUSS_PANEL_ORDER)
        return WptValue(value, error, x=x, xi=xi, scale=scale, path="physical")

    def count_at(h):
        return int(np.ceil((hi - lo) / h)) + 1

    def rule(h):
        n = count_at(h)
        y = np.linspace(lo, hi, n)
        step = (hi - lo) / (n - 1)
        g = integrand(y)
        return complex(step * np.sum(g)), float(step * np.sum(np.abs(g))), n

    value, error, scale = _adaptive(rule, h0, count_at)
    return WptValue(value, error, x=x, xi=xi, scale=scale, path="physical")


def _field_window_wpt(f: DataSource, window: ComplexField, x: float, xi: float) -> WptValue:
    """Closure data against a sampled (evolved) window centred at 0, translated to x."""
    f_lo, f_hi = f.physical_extent()
    grid = window.grid
    if x + grid.half_length <= f_lo or x - grid.half_length >= f_hi:
        return WptValue(0j, 0.0, x=x, xi=xi, scale=0.0, path="physical")

    while xi != 0 and grid.spacing > np.pi / (2.0 * abs(xi)):
        if 2 * grid.count > WPT_MAX_NODES:
            raise UnderResolved(f"window grid cannot resolve xi={xi} within {WPT_MAX_NODES} nodes")
        window = refine(window, 2)
        grid = window.grid

    def sum_on(w: ComplexField) -> Tuple[complex, float]:
        y = x + w.grid.nodes
        inside = (y >= f_lo) & (y <= f_hi)
        g = np.conj(w.samples[inside]) * f.evaluate(y[inside]) * np.exp(-1j * y[inside] * xi)
        h = w.grid.spacing
        return complex(h * np.sum(g)), float(h * np.sum(np.abs(g)))

    value, scale = sum_on(window)
    y = x + grid.nodes[::2]
    inside = (y >= f_lo) & (y <= f_hi)
    coarse = complex(2.0 * grid.spacing * np.sum(
        np.conj(window.samples[::2][inside]) * f.evaluate(y[inside]) * np.exp(-1j * y[inside] * xi)))
    error = abs(value - coarse)

    for _ in range(WPT_MAX_REFINEMENTS):
        if error <= WPT_RTOL * scale or 2 * window.grid.count > WPT_MAX_NODES:
            break
        window = refine(window, 2)
        fine, scale = sum_on(window)
        error = abs(fine - value)
        value = fine

    return WptValue(value, float(error), x=x, xi=xi, scale=scale, path="physical")


def forward_wpt(f: Union[DataSource, ComplexField], window: Window, x: float, xi: float) -> WptValue:
    """
    Physical-side W_phi f(x, xi).

    Args:
        f: Grid samples or a closure source with a support radius
        window: Scaled closure window, or samples centred at 0 (on f's grid
            for sampled data, on their own local grid for closure data)
        x: Position
        xi: Frequency

    Raises:
        UnderResolved: If the grid spacing exceeds pi/(2|xi|)
        UnknownSupport: For closures without profile or support radius
    """
    if isinstance(f, ComplexField):
        return _field_wpt(f, window, x, xi)
    if f.is_field:
        return _field_wpt(f.samples, window, x, xi)
    if isinstance(window, ComplexField):
        return _field_window_wpt(f, window, x, xi)
    return _closure_window_wpt(f, window, x, xi)


# Spectral side

def forward_wpt_spectral(f: DataSource, window: SpectralWindow, x: float, xi: float) -> WptValue:
    """
    Parseval-side W = (1/2pi) int f^(xi + zeta) conj(phi^(zeta)) e^{i x zeta} d zeta.

    The zeta range is the union of the window band and the data band around
    -xi, trimmed to where the integrand exceeds 1e-17 of its peak; the
    starting spacing resolves the largest phase rate on that range.

    Raises:
        NoSpectralClosure: If f has no analytic transform
    """
    if not isinstance(f, DataSource) or not f.has_spectrum:
        raise NoSpectralClosure(f"data source {getattr(f, 'name', f)!r} has no analytic transform")

    lo, hi = -window.band, window.band
    if np.isfinite(f.band):
        lo, hi = min(lo, -xi - f.band), max(hi, -xi + f.band)

    def integrand(zeta):
        return (f.transform(xi + zeta) * np.conj(window.spectrum(zeta))
                * np.exp(1j * x * zeta))

    scan = np.linspace(lo, hi, _SCAN_COUNT)
    mags = np.abs(integrand(scan))
    peak = float(np.max(mags))
    if peak == 0.0 or not np.isfinite(peak):
        return WptValue(0j, 0.0, x=x, xi=xi, scale=0.0, path="spectral")
    idx = np.nonzero(mags > _SCAN_FLOOR * peak)[0]
    lo = scan[max(idx[0] - 1, 0)]
    hi = scan[min(idx[-1] + 1, _SCAN_COUNT - 1)]
    zone = scan[(scan >= lo) & (scan <= hi)]

    rate = (x + window.phase_rate(zone) + 3.0 * f.dispersion_time * (xi + zone) ** 2)
    width = window.radius + abs(f.center) + (f.support_radius or 0.0)
    omega = float(np.max(np.abs(rate))) + width + 1.0
    h0 = min(0.25, np.pi / omega)

    def count_at(h):
        return int(np.ceil((hi - lo) / h)) + 1

    def rule(h):
        n = count_at(h)
        step = (hi - lo) / (n - 1)
        total, mass = 0j, 0.0
        for start in range(0, n, _CHUNK):
            zeta = lo + step * np.arange(start, min(n, start + _CHUNK))
            g = integrand(zeta)
            total += np.sum(g)
            mass += np.sum(np.abs(g))
        norm = step / (2.0 * np.pi)
        return complex(norm * total), float(norm * mass), n

    value, error, scale = _adaptive(rule, h0, count_at)
    logger.debug(f"spectral WPT at ({x:.6g}, {xi:.6g}): |W|={abs(value):.3e}, err={error:.1e}")
    return WptValue(value, error, x=x, xi=xi, scale=scale, path="spectral")


def evaluate_wpt(f: DataSource, spec: WindowSpec, x: float, xi: float, t0: float = 0.0,
                 prefer_spectral: bool = True) -> WptValue:
    """
    W of f against the scaled window (evolved for t0 != 0) choosing the path:
    spectral whenever f has an analytic transform, physical otherwise.
    """
    if prefer_spectral and f.has_spectrum:
        return forward_wpt_spectral(f, spectral_window(spec, t0, xi), x, xi)
    if t0 == 0:
        return forward_wpt(f, spec, x, xi)
    # sampled data: evolved window on the data grid; closures: on its own local grid
    grid = f.samples.grid if f.is_field else local_grid(spec, t0, xi)
    return forward_wpt(f, detector_window(spec, grid, t0, xi), x, xi)


# Batched slices and inversion

def _centred(window: ComplexField) -> np.ndarray:
    """Window samples rolled so index 0 holds phi(0)."""
    return np.roll(window.samples, -window.grid.count // 2)


def wpt_slice(f: ComplexField, window: ComplexField, xi: float) -> ComplexField:
    """
    W(x_j, xi) for every node by one circular correlation:
    W = h ifft(fft(f e^{-iy xi}) conj(fft(p))).
    """
    if f.grid != window.grid:
        raise GridMismatch(f"window on {window.grid}, data on {f.grid}")
    grid = f.grid
    g = f.samples * np.exp(-1j * grid.nodes * xi)
    p = _centred(window)
    values = grid.spacing * sfft.ifft(sfft.fft(g) * np.conj(sfft.fft(p)))
    return ComplexField(grid, values)


def wpt_matrix(f: ComplexField, window: ComplexField, xi_values: Sequence[float]) -> np.ndarray:
    """Rows W(., xi_k) for each xi_k."""
    return np.vstack([wpt_slice(f, window, xi).samples for xi in xi_values])


def _window_radius(window: ComplexField) -> float:
    mags = np.abs(window.samples)
    peak = np.max(mags)
    if peak == 0:
        raise ContractError("window is the zero function")
    offsets = np.abs(window.grid.nodes[mags > _NEGLIGIBLE * peak])
    return float(np.max(offsets))


def inverse_wpt(W: np.ndarray, window: ComplexField, xi_values: Sequence[float]) -> ComplexField:
    """
    Reconstruct f from W on the full x grid and a lattice of xi values.

    f = (dxi h / (2 pi ||phi||^2)) sum_k e^{iy xi_k} ifft(fft(W_k) fft(p)),
    exact when xi_k runs over a full residue set of lattice stride M with
    dxi = M pi / L <= pi / R_window.

    Raises:
        GridTooCoarse: If the xi set is not such a lattice
    """
    grid = window.grid
    xi = np.asarray(xi_values, dtype=float)
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    if W.shape != (xi.size, grid.count):
        raise ContractError(f"W has shape {W.shape}, expected ({xi.size}, {grid.count})")
    if xi.size < 1:
        raise GridTooCoarse("no xi samples")

    base = grid.frequency_spacing
    if xi.size == 1:
        stride = grid.count
        dxi = stride * base
    else:
        steps = np.diff(xi)
        dxi = float(steps[0])
        if not np.allclose(steps, dxi, rtol=1e-9, atol=0.0):
            raise GridTooCoarse("xi samples are not uniformly spaced")
        stride = int(round(dxi / base))
        if stride < 1 or abs(stride * base - dxi) > 1e-9 * dxi:
            raise GridTooCoarse(f"xi spacing {dxi:.6g} is not a multiple of pi/L = {base:.6g}")
    if stride * xi.size != grid.count:
        raise GridTooCoarse(f"{xi.size} xi samples at stride {stride} do not cover the lattice period")
    radius = _window_radius(window)
    if dxi > np.pi / radius:
        raise GridTooCoarse(f"xi spacing {dxi:.4g} exceeds pi / window radius = {np.pi / radius:.4g}")

    p_hat = sfft.fft(_centred(window))
    y = grid.nodes
    total = np.zeros(grid.count, dtype=complex)
    for k, row in enumerate(W):
        total += np.exp(1j * y * xi[k]) * sfft.ifft(sfft.fft(row) * p_hat)

    norm2 = l2_norm(window) ** 2
    return ComplexField(grid, dxi * grid.spacing / (2.0 * np.pi * norm2) * total)
