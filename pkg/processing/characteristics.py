"""
Backward bicharacteristics x'(t) = -3 lam^2 xi^2 + a(t, x), x(t0) = x0
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp, trapezoid

from config.settings import (
    CHAR_ATOL,
    CHAR_RTOL,
    PICARD_MAX_ITER,
    PICARD_NODES,
    PICARD_STALL_WINDOW,
    PICARD_TOL,
)
from models.errors import ContractError, NoConvergence, NonFinite, StepUnderflow
from models.results import CharPath, EscapeBoundReport
from providers.base import CoefficientModel

logger = logging.getLogger(__name__)

# dense-output samples kept per near-field segment
_DENSE_SAMPLES = 64
# refined run uses tolerances divided by this factor for the error estimate
_REFINE_FACTOR = 16.0
_MAX_SEGMENTS = 1000


@dataclass(frozen=True)
class CharSpec:
    """Characteristic through (t0, x0) for direction xi at scale lam"""
    x0: float
    t0: float
    xi: float
    lam: float
    coefficient: CoefficientModel = field(repr=False)
    rtol: float = CHAR_RTOL
    atol: float = CHAR_ATOL

    def __post_init__(self):
        if not self.lam >= 1.0:
            raise ContractError(f"lambda must be >= 1, got {self.lam}")
        if not all(np.isfinite([self.x0, self.t0, self.xi])):
            raise ContractError("characteristic data must be finite")

    @property
    def drift(self) -> float:
        """3 lam^2 xi^2"""
        return 3.0 * self.lam ** 2 * self.xi ** 2

    @property
    def frequency(self) -> float:
        """lam xi"""
        return self.lam * self.xi

    def refined(self, factor: float) -> "CharSpec":
        return CharSpec(self.x0, self.t0, self.xi, self.lam, self.coefficient,
                        self.rtol / factor, self.atol / factor)


def _far_drift(x: float, t: float, c: float, x_far: float) -> float:
    """
    Time at which exact drift from (t, x) toward t = 0 re-enters |x| < x_far,
    or 0 when it never does. Returns t itself when x sits on the boundary
    and moves inward.
    """
    if x_far <= 0:
        return 0.0
    x_end = x + c * t
    if x <= -x_far and x_end > -x_far:
        entry = -x_far
    elif x >= x_far and x_end < x_far:
        entry = x_far
    else:
        return 0.0
    elapsed = abs(entry - x) / c
    return t - np.sign(t) * elapsed


def _integrate(spec: CharSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Sweep from t0 to 0, alternating exact drift where the coefficient is
    below FAR_FIELD_LEVEL with adaptive RK45 near its support.

    Returns:
        (times in sweep order, positions, transport phase)
    """
    coeff = spec.coefficient
    c = spec.drift
    k = spec.frequency
    x_far = coeff.far_field_radius(min(0.0, spec.t0), max(0.0, spec.t0))

    t, x, phase = spec.t0, spec.x0, 0.0
    times, positions = [t], [x]

    def rhs(s, state):
        a = float(coeff.derivative(s, state[0], 0))
        # phase(s) = int_s^t0 (k^3 - k a), so phase' = -(k^3 - k a)
        return [-c + a, -(k ** 3 - k * a)]

    def leaves(s, state):
        return abs(state[0]) - x_far

    leaves.terminal = True
    leaves.direction = 1.0

    for _ in range(_MAX_SEGMENTS):
        if t == 0.0:
            break

        if abs(x) >= x_far:
            t_next = _far_drift(x, t, c, x_far)
            if t_next != t:
                # x(t') = x + c (t - t') while a is negligible
                x += c * (t - t_next)
                phase += k ** 3 * (t - t_next)
                t = t_next
                times.append(t)
                positions.append(x)
                continue

        sol = solve_ivp(
            rhs, (t, 0.0), [x, phase], method="RK45",
            rtol=spec.rtol, atol=spec.atol, dense_output=True,
            events=leaves if np.isfinite(x_far) and x_far > 0 else None,
        )
        if sol.status == -1:
            raise StepUnderflow(f"characteristic integration failed near t={sol.t[-1]:.6g}: {sol.message}")
        if not np.all(np.isfinite(sol.y)):
            raise NonFinite(f"characteristic overflow near t={sol.t[-1]:.6g}")

        t_end = float(sol.t[-1])
        dense = np.linspace(t, t_end, _DENSE_SAMPLES)[1:]
        times.extend(dense.tolist())
        positions.extend(sol.sol(dense)[0].tolist())
        t, x, phase = t_end, float(sol.y[0, -1]), float(sol.y[1, -1])
        if sol.status == 1:
            # snap onto the boundary so the drift branch takes over
            x = float(np.sign(x)) * x_far
            positions[-1] = x
    else:
        raise StepUnderflow(f"characteristic did not reach t=0 in {_MAX_SEGMENTS} segments")

    return np.array(times), np.array(positions), phase


def trace(spec: CharSpec, estimate_error: bool = True) -> CharPath:
    """
    Trace x(t; lam) from (t0, x0) back to t = 0 and the transport phase
    Phi = int_0^t0 (lam^3 xi^3 - lam xi a(t, x(t))) dt.

    Example:
        >>> path = trace(CharSpec(0.0, 1.0, 1.0, 10.0, ZeroCoefficient()))
        >>> path.x_at_zero
        300.0
    """
    if spec.t0 == 0:
        return CharPath(times=np.array([0.0]), positions=np.array([spec.x0]), x_at_zero=spec.x0)

    times, positions, phase = _integrate(spec)
    x_at_zero = float(positions[-1])
    x_far = spec.coefficient.far_field_radius(min(0.0, spec.t0), max(0.0, spec.t0))

    # rerun with tighter tolerances unless the whole path was exact drift
    if estimate_error and len(times) > 2:
        _, fine_positions, _ = _integrate(spec.refined(_REFINE_FACTOR))
        error = 2.0 * abs(fine_positions[-1] - positions[-1]) + 4.0 * spec.atol
    else:
        error = 0.0

    order = np.argsort(times, kind="stable")
    times, positions = times[order], positions[order]
    # collapse duplicate times from segment joins
    keep = np.concatenate([[True], np.diff(times) > 0])
    path = CharPath(
        times=times[keep],
        positions=positions[keep],
        x_at_zero=x_at_zero,
        phase=float(phase),
        error_estimate=float(error),
        far_field_radius=float(x_far),
    )
    logger.debug(f"trace lam={spec.lam} xi={spec.xi}: x(0)={path.x_at_zero:.10g} (+-{error:.2e})")
    return path


def forward_position(coeff: CoefficientModel, lam: float, xi: float, x_start: float, t0: float,
                     rtol: float = CHAR_RTOL, atol: float = CHAR_ATOL) -> float:
    """Integrate x' = -3 lam^2 xi^2 + a forward from (0, x_start) to t0."""
    c = 3.0 * lam ** 2 * xi ** 2
    sol = solve_ivp(lambda s, y: [-c + float(coeff.derivative(s, y[0], 0))], (0.0, t0), [x_start],
                    method="RK45", rtol=rtol, atol=atol)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    return float(sol.y[0, -1])


def picard_iterate(spec: CharSpec, iterations: int = PICARD_MAX_ITER, nodes: int = PICARD_NODES,
                   tol: float = PICARD_TOL) -> CharPath:
    """
    First-order Picard map on [0, t0]:
    x_{k+1}(s) = x0 + int_{t0}^s (-3 lam^2 xi^2 + a(s1, x_k(s1))) ds1,
    from x_0(s) = x0 - 3 (s - t0) lam^2 xi^2, trapezoid rule on uniform nodes.

    Raises:
        NoConvergence: If successive differences stall or iterations run out
    """
    if iterations < 1:
        raise ContractError(f"iterations must be >= 1, got {iterations}")
    if spec.t0 == 0:
        return CharPath(times=np.array([0.0]), positions=np.array([spec.x0]), x_at_zero=spec.x0)

    coeff = spec.coefficient
    s = np.linspace(0.0, spec.t0, nodes)
    drift = spec.x0 + spec.drift * (spec.t0 - s)
    x = drift.copy()
    history: List[float] = []

    for n in range(1, iterations + 1):
        a = coeff.along_path(s, x)
        integral = cumulative_trapezoid(a, s, initial=0.0)
        # int_{t0}^s a = I(s) - I(t0)
        x_next = drift + (integral - integral[-1])
        diff = float(np.max(np.abs(x_next - x)))
        x = x_next
        history.append(diff)
        logger.debug(f"Picard iteration {n}: sup diff {diff:.3e}")
        if diff < tol:
            a = coeff.along_path(s, x)
            phase = spec.frequency ** 3 * spec.t0 - spec.frequency * float(trapezoid(a, s))
            return CharPath(times=s, positions=x, x_at_zero=float(x[0]), phase=float(phase),
                            error_estimate=diff, iterate_gaps=tuple(history))
        window = PICARD_STALL_WINDOW
        if len(history) > window and min(history[-window:]) >= history[-window - 1]:
            raise NoConvergence(f"Picard iteration stalled at sup diff {diff:.3e} after {n} iterations")

    raise NoConvergence(f"Picard iteration did not reach {tol:g} in {iterations} iterations (last {history[-1]:.3e})")


def escape_bound_check(b: float, theta: float, lambdas: Iterable[float], x0_values: Iterable[float],
                       xi_values: Iterable[float], coeff: CoefficientModel, t0: float = 0.5,
                       s_count: int = 20) -> EscapeBoundReport:
    """
    Check |x(s; lam)| >= (3 / 2b^2) lam^2 |s - t0| for |s - t0| >= lam^{-theta}.

    Returns:
        EscapeBoundReport with lambda0 = smallest sampled lambda from which on every
        sample passes (None if the largest lambda still fails)
    """
    if b < 1:
        raise ContractError(f"b must be >= 1, got {b}")
    if not 0 < theta < 2:
        raise ContractError(f"theta must lie in (0, 2), got {theta}")
    xi_values = [float(v) for v in xi_values]
    if any(not (1.0 / b <= abs(v) <= b) for v in xi_values):
        raise ContractError(f"directions {xi_values} outside 1/b <= |xi| <= b for b={b}")

    lams = sorted(float(v) for v in lambdas)
    x0s = [float(v) for v in x0_values]
    s_values = np.linspace(0.0, t0, s_count)
    samples, failures = 0, 0
    worst = 0.0
    failed_at: List[float] = []

    for lam in lams:
        lam_failed = False
        gap = np.abs(s_values - t0)
        active = s_values[gap >= lam ** -theta]
        bound = 1.5 / b ** 2 * lam ** 2 * np.abs(active - t0)
        for xi in xi_values:
            for x0 in x0s:
                path = trace(CharSpec(x0, t0, xi, lam, coeff), estimate_error=False)
                reach = np.abs(path.position(active))
                samples += active.size
                with np.errstate(divide="ignore"):
                    ratio = np.where(reach > 0, bound / np.where(reach > 0, reach, 1.0), np.inf)
                if ratio.size:
                    worst = max(worst, float(np.max(ratio)))
                bad = int(np.sum(reach < bound))
                if bad:
                    failures += bad
                    lam_failed = True
        if lam_failed:
            failed_at.append(lam)

    lambda0: Optional[float] = None
    for lam in reversed(lams):
        if lam in failed_at:
            break
        lambda0 = lam

    report = EscapeBoundReport(lambda0=lambda0, worst_ratio=worst, samples=samples,
                         failures=failures, failing_lambdas=failed_at)
    logger.info(f"Escape bound check: lambda0={lambda0}, worst ratio={worst:.3g}, "
                f"{failures}/{samples} failures")
    return report
