"""
User-supplied coefficient closures
"""
import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_RHO, FAR_FIELD_LEVEL, FAR_FIELD_SEARCH_LIMIT
from providers.base import CoefficientModel

logger = logging.getLogger(__name__)

Evaluator = Callable[[float, np.ndarray, int], np.ndarray]


class CustomCoefficient(CoefficientModel):
    """
    Coefficient given by a pure closure (t, x, k) -> d^k a / dx^k.

    The closure must supply its own derivatives up to max_order; no automatic
    differentiation is attempted.
    """

    kind = "custom"

    def __init__(
        self,
        evaluator: Evaluator,
        max_order: int,
        rho: float = DEFAULT_RHO,
        decay_constants: Optional[Dict[Tuple[int, int], float]] = None,
        radius: Optional[float] = None,
        name: str = "custom",
    ):
        super().__init__(rho=rho, decay_constants=decay_constants)
        self.evaluator = evaluator
        self.max_order = int(max_order)
        self.radius = radius
        self.name = name

    @property
    def max_derivative(self) -> Optional[int]:
        return self.max_order

    def _derivative(self, t: float, x: np.ndarray, k: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.evaluator(t, x, k), dtype=float), x.shape).copy()

    def far_field_radius(self, t_min: float, t_max: float) -> float:
        if self.radius is not None:
            return float(self.radius)

        times = np.linspace(t_min, t_max, 9)
        orders = range(min(1, self.max_order) + 1)
        radius = 1.0
        while radius <= FAR_FIELD_SEARCH_LIMIT:
            far = np.concatenate([np.linspace(radius, 4.0 * radius, 64), -np.linspace(radius, 4.0 * radius, 64)])
            level = max(float(np.max(np.abs(self.derivative(t, far, k)))) for t in times for k in orders)
            if level < FAR_FIELD_LEVEL:
                return radius
            radius *= 2.0

        logger.warning(f"Coefficient '{self.name}' has no far-field radius below {FAR_FIELD_SEARCH_LIMIT:g}")
        return float("inf")
