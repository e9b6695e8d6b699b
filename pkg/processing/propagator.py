"""
Free Airy flow, window evolution and window scaling as exact Fourier multipliers
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from config.settings import DEFAULT_D, DEFAULT_RHO, WINDOW_GUARD_CELLS, WPT_MAX_NODES
from models.errors import ContractError, UnderResolved, UnderResolvedWindow
from models.field import ComplexField, Grid1D, next_power_of_two
from processing.field import apply_multiplier, derivative
from providers.windows import WindowFunction, get_window

logger = logging.getLogger(__name__)

Spectrum = Callable[[np.ndarray], np.ndarray]

_TWO_PI = 2.0 * np.pi

# +1 in normal operation; flipped only by the self-verification mutation switch
_PHASE_SIGN = 1.0


@contextmanager
def flipped_phase_sign() -> Iterator[None]:
    """Temporarily conjugate every propagator multiplier."""
    global _PHASE_SIGN
    previous = _PHASE_SIGN
    _PHASE_SIGN = -previous
    logger.warning("Propagator phase sign flipped")
    try:
        yield
    finally:
        _PHASE_SIGN = previous


def phase_sign() -> float:
    """+1 normally, -1 inside flipped_phase_sign()"""
    return _PHASE_SIGN


def _unimodular(phase: np.ndarray) -> np.ndarray:
    # reduce mod 2 pi per node before exponentiating
    return np.exp(1j * _PHASE_SIGN * np.mod(phase, _TWO_PI))


def airy_multiplier(t: float) -> Spectrum:
    """eta -> e^{i eta^3 t}"""
    return lambda eta: _unimodular(np.asarray(eta, dtype=float) ** 3 * t)


def window_multiplier(t: float, xi: float) -> Spectrum:
    """eta -> e^{i t (eta^3 - 3 xi eta^2)}"""
    def m(eta):
        eta = np.asarray(eta, dtype=float)
        return _unimodular(t * eta ** 2 * (eta - 3.0 * xi))
    return m


def airy_propagate(u: ComplexField, t: float) -> ComplexField:
    """
    Free flow u -> e^{-t d^3} u.

    Example:
        >>> airy_propagate(u, 0.0) is u
        True
    """
    if t == 0:
        return u
    return apply_multiplier(u, airy_multiplier(t))


def window_evolve(phi: ComplexField, t: float, xi: float) -> ComplexField:
    """e^{-t(d^3 - 3 i xi d^2)} phi; equals airy_propagate for xi = 0."""
    if t == 0:
        return phi
    return apply_multiplier(phi, window_multiplier(t, xi))


@dataclass(frozen=True)
class WindowSpec:
    """Base window, scale exponent d and scale lambda."""
    base: WindowFunction
    d: float = DEFAULT_D
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam >= 1.0:
            raise ContractError(f"window scale lambda must be >= 1, got {self.lam}")

    @classmethod
    def named(cls, name: str, d: float = DEFAULT_D, lam: float = 1.0) -> "WindowSpec":
        return cls(get_window(name), d, lam)

    def at(self, lam: float) -> "WindowSpec":
        return WindowSpec(self.base, self.d, lam)

    @property
    def width(self) -> float:
        """lambda^{-d}"""
        return self.lam ** -self.d

    @property
    def radius(self) -> float:
        return self.base.radius * self.width

    @property
    def band(self) -> float:
        return self.base.band / self.width

    def profile(self) -> Spectrum:
        return self.base.scaled_profile(self.lam, self.d)

    def spectrum(self) -> Spectrum:
        return self.base.scaled_spectrum(self.lam, self.d)


def check_admissible(d: float, rho: float = DEFAULT_RHO) -> None:
    """
    Require min(rho, 1/4) < d < 2 min(rho, 1/4).

    Raises:
        ContractError: If d is outside the open interval
    """
    r = min(rho, 0.25)
    if not (r < d < 2.0 * r):
        raise ContractError(f"scale exponent d={d} not in ({r}, {2.0 * r}) for rho={rho}")


def scaled_window(spec: WindowSpec, grid: Grid1D) -> ComplexField:
    """
    Samples of lambda^{d/2} phi0(lambda^d x).

    Raises:
        UnderResolvedWindow: If lambda^{-d} < WINDOW_GUARD_CELLS * h
    """
    if spec.width < WINDOW_GUARD_CELLS * grid.spacing:
        raise UnderResolvedWindow(
            f"window width {spec.width:.4g} below {WINDOW_GUARD_CELLS} cells of h={grid.spacing:.4g}"
        )
    return grid.sample(spec.profile())


def detector_window_multiplier(t0: float, xi_eff: float) -> Spectrum:
    """eta -> e^{-i t0 (eta^3 + 3 xi_eff eta^2)}, the criterion (ii) window flow."""
    return window_multiplier(-t0, -xi_eff)


def detector_window(spec: WindowSpec, grid: Grid1D, t0: float, xi_eff: float) -> ComplexField:
    """
    Window entering the initial-data criterion: window_evolve(phi_{0,lambda}, -t0, -xi_eff).

    With u(t0) = e^{-t0 d^3} u0 this gives exactly
    W_phi u(t0)(x, xi) = e^{i xi^3 t0} W_psi u0(x + 3 xi^2 t0, xi).
    """
    return window_evolve(scaled_window(spec, grid), -t0, -xi_eff)


def detector_window_spectrum(spec: WindowSpec, t0: float, xi_eff: float) -> Spectrum:
    base = spec.spectrum()
    flow = detector_window_multiplier(t0, xi_eff)
    return lambda eta: base(eta) * flow(eta)


def window_spread(spec: WindowSpec, t0: float, xi_eff: float) -> float:
    """Half-width of the evolved window: envelope radius plus group-delay range over the band."""
    band = spec.band
    return spec.radius + abs(t0) * (3.0 * band ** 2 + 6.0 * abs(xi_eff) * band)


def local_grid(spec: WindowSpec, t0: float = 0.0, xi_eff: float = 0.0,
               max_nodes: Optional[int] = None) -> Grid1D:
    """
    Smallest power-of-two grid centred at 0 holding the evolved window and
    resolving its band with two nodes per shortest wavelength.

    Raises:
        UnderResolved: If the grid would exceed max_nodes
    """
    max_nodes = max_nodes or WPT_MAX_NODES
    spacing = np.pi / (2.0 * spec.band)
    half = window_spread(spec, t0, xi_eff)
    count = next_power_of_two(2.0 * half / spacing)
    if count > max_nodes:
        raise UnderResolved(f"evolved window needs {count} nodes (limit {max_nodes})")
    return Grid1D(half_length=0.5 * count * spacing, count=count)


def commuting_operator(u: ComplexField, t: float) -> ComplexField:
    """K(t) u = x u - 3 t u_xx, which commutes with d_t + d^3."""
    x = u.grid.nodes
    return u.replace(x * u.samples) - 3.0 * t * derivative(u, 2)


def centroid(u: ComplexField) -> float:
    """Centre of mass of |u|^2."""
    density = np.abs(u.samples) ** 2
    total = np.sum(density)
    if total == 0:
        return 0.0
    return float(np.sum(u.grid.nodes * density) / total)


