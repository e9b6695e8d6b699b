"""
Base windows phi0 for the wave packet transform

Every window is a nonzero Schwartz function with unit L2 norm, a physical
profile y -> phi0(y) and a spectrum eta -> phi0^(eta) under the e^{-iy eta}
convention.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import CubicSpline
from scipy.special import lambertw

from config.settings import BASE_WINDOWS, WINDOW_BAND_SIGMAS
from models.errors import ConfigError, ContractError

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]

_GAUSS_NORM = np.pi ** -0.25
_BUMP_HALF_WIDTH = 4.0
# spectra below this fraction of the peak count as numerically zero
_BAND_FLOOR = 1e-14


@dataclass(frozen=True)
class WindowFunction:
    """
    A base window with its transform and effective extents.

    radius is the half-width beyond which |phi0| < 1e-16; band the frequency
    beyond which |phi0^| is negligible.
    """
    name: str
    profile: Profile
    spectrum: Profile
    radius: float
    band: float
    compact: bool = False

    def __call__(self, y) -> np.ndarray:
        return self.profile(np.asarray(y, dtype=float))

    def scaled_profile(self, lam: float, d: float) -> Profile:
        """y -> lam^{d/2} phi0(lam^d y)"""
        s = lam ** d
        return lambda y: np.sqrt(s) * self.profile(s * np.asarray(y, dtype=float))

    def scaled_spectrum(self, lam: float, d: float) -> Profile:
        """eta -> lam^{-d/2} phi0^(eta / lam^d)"""
        s = lam ** d
        return lambda eta: self.spectrum(np.asarray(eta, dtype=float) / s) / np.sqrt(s)


def _gaussian_profile(y: np.ndarray) -> np.ndarray:
    return _GAUSS_NORM * np.exp(-0.5 * y ** 2)


def _gaussian_spectrum(eta: np.ndarray) -> np.ndarray:
    return (_GAUSS_NORM * np.sqrt(2.0 * np.pi) * np.exp(-0.5 * eta ** 2)).astype(complex)


def _sech_profile(y: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(y))
    return np.sqrt(2.0) * e / (1.0 + e ** 2)


def _sech_spectrum(eta: np.ndarray) -> np.ndarray:
    z = 0.5 * np.pi * np.abs(eta)
    e = np.exp(-z)
    return (np.pi * np.sqrt(2.0) * e / (1.0 + e ** 2)).astype(complex)


def _sech2_profile(y: np.ndarray) -> np.ndarray:
    e = np.exp(-2.0 * np.abs(y))
    return 2.0 * np.sqrt(3.0) * e / (1.0 + e) ** 2


def _sech2_spectrum(eta: np.ndarray) -> np.ndarray:
    # (sqrt(3)/2) pi eta / sinh(pi eta / 2), written as 4a e^{-a} / (1 - e^{-2a}) with a = pi|eta|/2
    a = 0.5 * np.pi * np.abs(np.asarray(eta, dtype=float))
    safe = np.where(a > 0, a, 1.0)
    ratio = np.where(a > 0, 4.0 * safe * np.exp(-safe) / -np.expm1(-2.0 * safe), 2.0)
    return (0.5 * np.sqrt(3.0) * ratio).astype(complex)


def _bump_raw(y: np.ndarray) -> np.ndarray:
    s = np.asarray(y, dtype=float) / _BUMP_HALF_WIDTH
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _gaussian() -> WindowFunction:
    return WindowFunction(
        name="gaussian",
        profile=_gaussian_profile,
        spectrum=_gaussian_spectrum,
        radius=WINDOW_BAND_SIGMAS,
        band=WINDOW_BAND_SIGMAS,
    )


def _sech() -> WindowFunction:
    # sqrt(2) e^{-r} < 1e-16 and pi sqrt(2) e^{-pi eta / 2} < 1e-16
    radius = np.log(np.sqrt(2.0) * 1e16)
    band = 2.0 * np.log(np.pi * np.sqrt(2.0) / _BAND_FLOOR) / np.pi
    return WindowFunction(
        name="sech", profile=_sech_profile, spectrum=_sech_spectrum,
        radius=float(radius), band=float(band),
    )


def _sech2() -> WindowFunction:
    """
    (sqrt(3)/2) sech^2(y): the profile tail is e^{-2|y|} and the spectrum
    tail pi|eta| e^{-pi|eta|/2}, so both sides decay exponentially.
    """
    # 2 sqrt(3) e^{-2r} < 1e-16; the band solves a e^{-a} = _BAND_FLOOR / 2 with a = pi eta / 2
    radius = 0.5 * np.log(2.0 * np.sqrt(3.0) * 1e16)
    band = -2.0 * lambertw(-0.5 * _BAND_FLOOR, k=-1).real / np.pi
    return WindowFunction(
        name="sech2", profile=_sech2_profile, spectrum=_sech2_spectrum,
        radius=float(radius), band=float(band),
    )


def _bump() -> WindowFunction:
    """
    C-infinity bump exp(1 - 1/(1 - (y/w)^2)) on |y| < w, normalized.

    The spectrum has no closed form; it is tabulated once by FFT (the
    rectangle rule is spectrally exact for a compactly supported smooth
    profile) and interpolated by a cubic spline. Its tail only falls like
    exp(-c sqrt|eta|), so over the default sweep range smooth data decays
    with an exponent near 2 and the calibration gap stays below 2.
    """
    half_length, count = 1024.0, 2 ** 18
    h = 2.0 * half_length / count
    nodes = -half_length + h * np.arange(count)
    raw = _bump_raw(nodes)
    norm = np.sqrt(h * np.sum(raw ** 2))

    k = np.arange(-count // 2, count // 2)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    table = (h * sign * sfft.fftshift(sfft.fft(raw / norm))).real
    eta = np.pi * k / half_length

    peak = np.max(np.abs(table))
    above = np.abs(eta[np.abs(table) > _BAND_FLOOR * peak])
    band = float(np.max(above))
    spline = CubicSpline(eta, table)
    logger.debug(f"bump spectrum tabulated: norm={norm:.6g}, band={band:.4g}")

    def spectrum(q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        out = np.where(np.abs(q) <= band, spline(np.clip(q, -band, band)), 0.0)
        return out.astype(complex)

    return WindowFunction(
        name="bump",
        profile=lambda y: _bump_raw(y) / norm,
        spectrum=spectrum,
        radius=_BUMP_HALF_WIDTH,
        band=band,
        compact=True,
    )


_FACTORIES: Dict[str, Callable[[], WindowFunction]] = {
    "gaussian": _gaussian,
    "sech": _sech,
    "sech2": _sech2,
    "bump": _bump,
}


@lru_cache(maxsize=None)
def get_window(name: str) -> WindowFunction:
    """
    Look up a base window by name.

    Raises:
        ConfigError: If the name is not one of BASE_WINDOWS
    """
    if name not in BASE_WINDOWS:
        raise ConfigError(f"Unknown base window '{name}'. Valid options: {', '.join(BASE_WINDOWS)}",
                          keys=["window.base"])
    return _FACTORIES[name]()


def window_from_closure(name: str, profile: Profile, spectrum: Profile, radius: float,
                        band: float) -> WindowFunction:
    """Wrap a user-supplied window pair."""
    if not (radius > 0 and band > 0):
        raise ContractError(f"window '{name}' needs positive radius and band")
    return WindowFunction(name=name, profile=profile, spectrum=spectrum, radius=radius, band=band)
