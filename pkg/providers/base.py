"""
Base coefficient interface
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_RHO, TIME_FD_STEP
from models.errors import UnsupportedDerivative


class CoefficientModel(ABC):
    """
    Abstract base class for the coefficient a(t, x) of the linearized equation
    u_t + u_xxx + (a u)_x = 0.

    This allows swapping between the zero coefficient, the soliton family and
    user closures without changing the solver, the characteristic tracer or
    the detector.
    """

    kind: str = "abstract"

    def __init__(self, rho: float = DEFAULT_RHO, decay_constants: Optional[Dict[Tuple[int, int], float]] = None):
        self.rho = float(rho)
        self.decay_constants: Dict[Tuple[int, int], float] = dict(decay_constants or {})

    @property
    def max_derivative(self) -> Optional[int]:
        """
        Highest x-derivative order the model can evaluate.

        Returns:
            Integer K_max, or None when every order is available
        """
        return None

    @abstractmethod
    def _derivative(self, t: float, x: np.ndarray, k: int) -> np.ndarray:
        """
        Evaluate d^k a / dx^k at time t.

        Args:
            t: Time
            x: Positions (array)
            k: Derivative order, already checked against max_derivative

        Returns:
            Real array shaped like x
        """
        pass

    @abstractmethod
    def far_field_radius(self, t_min: float, t_max: float) -> float:
        """
        Smallest X with sup over t in [t_min, t_max], k <= 1 of |d^k a(t, +-X')| below
        FAR_FIELD_LEVEL for every |X'| >= X.

        Returns:
            X (0 for the zero coefficient, inf when no such radius exists)
        """
        pass

    def derivative(self, t: float, x, k: int = 0) -> np.ndarray:
        """
        Evaluate d^k a(t, x) / dx^k.

        Args:
            t: Time
            x: Scalar or array of positions
            k: Derivative order

        Returns:
            Array of values (0-d for scalar x)

        Raises:
            UnsupportedDerivative: If k exceeds the declared K_max

        Example:
            >>> model = soliton_from_ratio(1.0, 1.0, 1.0, 0.0)
            >>> float(model.derivative(0.0, 0.0))
            12.0
        """
        if k < 0 or (self.max_derivative is not None and k > self.max_derivative):
            raise UnsupportedDerivative(
                f"{self.kind} coefficient supports derivatives up to {self.max_derivative}, got k={k}"
            )
        return self._derivative(float(t), np.asarray(x, dtype=float), int(k))

    def time_derivative(self, t: float, x, k: int = 0, step: float = TIME_FD_STEP) -> np.ndarray:
        """Central difference in t of d^k a / dx^k."""
        return (self.derivative(t + step, x, k) - self.derivative(t - step, x, k)) / (2.0 * step)

    def __call__(self, t: float, x) -> np.ndarray:
        return self.derivative(t, x, 0)

    def is_zero(self) -> bool:
        return False

    def get_kind_name(self) -> str:
        return self.kind

    def along_path(self, times, xs, k: int = 0) -> np.ndarray:
        """d^k a(t_j, x_j) / dx^k for paired samples (t_j, x_j)."""
        times = np.asarray(times, dtype=float)
        xs = np.asarray(xs, dtype=float)
        return np.array([float(self.derivative(t, x, k)) for t, x in zip(times, xs)])
