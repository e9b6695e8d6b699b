"""
Zero coefficient (free Airy flow)
"""
import numpy as np

from providers.base import CoefficientModel


class ZeroCoefficient(CoefficientModel):
    """
    a(t, x) = 0. Characteristics are straight lines and the solver reduces to
    the exact Airy multiplier.
    """

    kind = "zero"

    def _derivative(self, t: float, x: np.ndarray, k: int) -> np.ndarray:
        return np.zeros_like(x, dtype=float)

    def along_path(self, times, xs, k: int = 0) -> np.ndarray:
        return np.zeros(np.shape(xs), dtype=float)

    def far_field_radius(self, t_min: float, t_max: float) -> float:
        return 0.0

    def is_zero(self) -> bool:
        """Zero coefficient is always zero"""
        return True
