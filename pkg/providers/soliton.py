"""
Soliton coefficient a(t, x) = c sech^2(b (x - s t - x0))
"""
import logging
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from config.settings import DEFAULT_RHO, FAR_FIELD_LEVEL
from models.errors import ContractError, ZeroNonlinearity
from providers.base import CoefficientModel

logger = logging.getLogger(__name__)

_T = Polynomial([0.0, 1.0])
_ONE_MINUS_T2 = Polynomial([1.0, 0.0, -1.0])


@lru_cache(maxsize=None)
def _tanh_polynomial(k: int) -> Polynomial:
    """Q_k with d^k/dz^k sech^2 z = sech^2 z * Q_k(tanh z)."""
    if k == 0:
        return Polynomial([1.0])
    q = _tanh_polynomial(k - 1)
    return -2.0 * _T * q + _ONE_MINUS_T2 * q.deriv()


def _sech2(z: np.ndarray) -> np.ndarray:
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


class SolitonCoefficient(CoefficientModel):
    """
    Travelling sech^2 wave, the KdV soliton used as background coefficient.

    Derivatives of every order are closed form: d^k a / dx^k =
    c b^k sech^2(z) Q_k(tanh z) with z = b (x - s t - x0).
    """

    kind = "soliton"

    def __init__(
        self,
        amplitude: float,
        width: float,
        speed: float,
        offset: float = 0.0,
        nonlinearity: Optional[float] = None,
        dispersion: Optional[float] = None,
        rho: float = DEFAULT_RHO,
        decay_constants: Optional[Dict[Tuple[int, int], float]] = None,
    ):
        super().__init__(rho=rho, decay_constants=decay_constants)
        if width == 0:
            raise ContractError("soliton width b must be nonzero")
        self.amplitude = float(amplitude)
        self.width = float(width)
        self.speed = float(speed)
        self.offset = float(offset)
        # generating KdV coefficients (a_nl, gamma) when known
        self.nonlinearity = nonlinearity
        self.dispersion = dispersion

    def crest(self, t: float) -> float:
        return self.speed * t + self.offset

    def _derivative(self, t: float, x: np.ndarray, k: int) -> np.ndarray:
        z = self.width * (x - self.crest(t))
        return self.amplitude * self.width ** k * _sech2(z) * _tanh_polynomial(k)(np.tanh(z))

    def along_path(self, times, xs, k: int = 0) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        z = self.width * (np.asarray(xs, dtype=float) - self.speed * times - self.offset)
        return self.amplitude * self.width ** k * _sech2(z) * _tanh_polynomial(k)(np.tanh(z))

    def far_field_radius(self, t_min: float, t_max: float) -> float:
        # |a| <= 4|c| e^{-2|b z|}, |a_x| <= 8|c b| e^{-2|b z|}
        b = abs(self.width)
        bound = 4.0 * abs(self.amplitude) * max(1.0, 2.0 * b)
        if bound < FAR_FIELD_LEVEL:
            return 0.0
        reach = np.log(bound / FAR_FIELD_LEVEL) / (2.0 * b)
        drift = max(abs(self.crest(t_min)), abs(self.crest(t_max)))
        return float(drift + reach)

    def with_constants(self, decay_constants: Dict[Tuple[int, int], float]) -> "SolitonCoefficient":
        return SolitonCoefficient(
            self.amplitude, self.width, self.speed, self.offset,
            self.nonlinearity, self.dispersion, self.rho, decay_constants,
        )

    def __repr__(self) -> str:
        return (f"SolitonCoefficient(c={self.amplitude}, b={self.width}, "
                f"s={self.speed}, x0={self.offset})")


def soliton_from_ratio(a_nl: float, gamma: float, b_w: float, x0: float = 0.0,
                       rho: float = DEFAULT_RHO) -> SolitonCoefficient:
    """
    Build the soliton of f_t + a_nl f f_x + gamma f_xxx = 0 with width b_w.

    Args:
        a_nl: Nonlinear coefficient (nonzero)
        gamma: Dispersion coefficient (positive)
        b_w: Width parameter (nonzero)
        x0: Offset at t = 0
        rho: Declared decay exponent

    Returns:
        SolitonCoefficient with c = 12 b^2 gamma / a_nl and s = 4 b^2 gamma

    Raises:
        ZeroNonlinearity: If a_nl == 0

    Example:
        >>> m = soliton_from_ratio(1.0, 1.0, 1.0)
        >>> (m.amplitude, m.speed)
        (12.0, 4.0)
    """
    if a_nl == 0:
        raise ZeroNonlinearity("a_nl must be nonzero to fix the soliton amplitude")
    if not gamma > 0:
        raise ContractError(f"gamma must be positive, got {gamma}")
    if b_w == 0:
        raise ContractError("b_w must be nonzero")

    amplitude = 12.0 * b_w ** 2 * gamma / a_nl
    speed = 4.0 * b_w ** 2 * gamma
    logger.debug(f"Soliton from ratio: c={amplitude}, s={speed}")
    return SolitonCoefficient(amplitude, b_w, speed, x0, nonlinearity=a_nl, dispersion=gamma, rho=rho)
