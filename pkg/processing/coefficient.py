"""
Coefficient evaluation, decay certification and the soliton residual
"""
import logging
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from config.settings import TIME_FD_STEP
from models.errors import NotASoliton
from models.field import Grid1D
from models.results import DecayReport
from processing.field import derivative
from providers.base import CoefficientModel
from providers.soliton import SolitonCoefficient

logger = logging.getLogger(__name__)


def evaluate(model: CoefficientModel, t: float, x, k: int = 0) -> np.ndarray:
    """d^k a(t, x) / dx^k (see CoefficientModel.derivative)."""
    return model.derivative(t, x, k)


def _orders(model: CoefficientModel, l2_max: int) -> Iterable[Tuple[int, int]]:
    top = l2_max if model.max_derivative is None else min(l2_max, model.max_derivative)
    for l1 in (0, 1):
        for l2 in range(top + 1):
            yield l1, l2


def _weighted_sup(model: CoefficientModel, times: np.ndarray, xs: np.ndarray, l1: int, l2: int,
                  rho: float) -> float:
    weight = (1.0 + np.abs(xs)) ** (rho + l1 + l2)
    sup = 0.0
    for t in times:
        values = model.derivative(t, xs, l2) if l1 == 0 else model.time_derivative(t, xs, l2)
        sup = max(sup, float(np.max(np.abs(values) * weight)))
    return sup


def verify_decay(model: CoefficientModel, times, xs, l2_max: int = 4) -> DecayReport:
    """
    Sample |d_t^l1 d_x^l2 a| (1+|x|)^{rho+l1+l2} / C_{l1,l2} for l1 <= 1, l2 <= l2_max.

    A missing constant counts as zero: the ratio is infinite unless the
    sampled supremum vanishes.

    Example:
        >>> report = verify_decay(ZeroCoefficient(), [0.0], np.linspace(-5, 5, 11))
        >>> report.passed
        True
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ratios: Dict[Tuple[int, int], float] = {}
    counts: Dict[Tuple[int, int], int] = {}

    for key in _orders(model, l2_max):
        sup = _weighted_sup(model, times, xs, key[0], key[1], model.rho)
        constant = model.decay_constants.get(key, 0.0)
        if sup == 0.0:
            ratios[key] = 0.0
        elif constant <= 0.0:
            ratios[key] = float("inf")
        else:
            ratios[key] = sup / constant
        counts[key] = times.size * xs.size

    report = DecayReport(ratios=ratios, sample_counts=counts, rho=model.rho)
    logger.info(f"Decay check ({model.get_kind_name()}, rho={model.rho}): "
                f"passed={report.passed}, worst ratio={report.worst_ratio:.3g}")
    return report


def sampled_decay_constants(model: CoefficientModel, times, xs, l2_max: int = 4,
                            safety: float = 2.0) -> Dict[Tuple[int, int], float]:
    """Constants C_{l1,l2} = safety * sampled sup, for models declared without them."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return {
        key: safety * _weighted_sup(model, times, xs, key[0], key[1], model.rho)
        for key in _orders(model, l2_max)
    }


def time_rate(model: CoefficientModel, t: float, x, step: float = TIME_FD_STEP) -> np.ndarray:
    """(8 (a(t+h) - a(t-h)) - (a(t+2h) - a(t-2h))) / 12h, error O(h^4)"""
    near = model.derivative(t + step, x, 0) - model.derivative(t - step, x, 0)
    far = model.derivative(t + 2.0 * step, x, 0) - model.derivative(t - 2.0 * step, x, 0)
    return (8.0 * near - far) / (12.0 * step)


def kdv_residual(model: CoefficientModel, grid: Grid1D, t: float = 0.0,
                 nonlinearity: Optional[float] = None, dispersion: Optional[float] = None) -> float:
    """
    Sup norm of f_t + a_nl f f_x + gamma f_xxx for the soliton f = model(t, .).

    Space derivatives are spectral; f_t is a fourth-order central difference
    of the model in time, so the travelling-wave form is not assumed.

    Raises:
        NotASoliton: For zero or custom coefficients
    """
    if not isinstance(model, SolitonCoefficient):
        raise NotASoliton(f"kdv_residual needs a soliton coefficient, got {model.get_kind_name()}")

    gamma = dispersion if dispersion is not None else (model.dispersion or 1.0)
    if nonlinearity is not None:
        a_nl = nonlinearity
    elif model.nonlinearity is not None:
        a_nl = model.nonlinearity
    else:
        a_nl = 12.0 * model.width ** 2 * gamma / model.amplitude

    f = grid.sample(lambda x: model.derivative(t, x, 0))
    f_x = derivative(f, 1).real
    f_xxx = derivative(f, 3).real
    f_t = time_rate(model, t, grid.nodes)

    residual = float(np.max(np.abs(f_t + a_nl * f.real * f_x + gamma * f_xxx)))
    logger.debug(f"KdV residual at t={t}: {residual:.3e} (a_nl={a_nl}, gamma={gamma})")
    return residual
