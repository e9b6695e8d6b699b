"""
Microlocal regularity detector

Criterion (i) windows the solution at t0 around (x0, lam xi0); criterion (ii)
windows the initial datum around the back-traced point (x(0; lam), lam xi0)
with the evolved window. Both feed a lambda sweep whose fitted decay exponent
is thresholded into Regular / Singular / Indeterminate.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import linregress

from config.settings import (
    CALIBRATION_MIN_GAP,
    DEFAULT_MARGIN,
    LAMBDA_COUNT,
    LAMBDA_MAX,
    LAMBDA_MIN,
    MIN_SWEEP_COUNT,
    R2_GATE,
    RESOLUTION_FLOOR,
    SOLVER_DT,
    UNDERFLOW_FLOOR,
)
from models.errors import (
    CalibrationGapTooSmall,
    ContractError,
    SweepTooShort,
    UnderResolved,
    UnderResolvedWindow,
    WavefrontError,
)
from models.field import Grid1D
from models.results import (
    Classification,
    DecayFit,
    EquivalenceRecord,
    EquivalenceReport,
    MapCell,
    PhasePoint,
    Threshold,
    WfMap,
    WptValue,
)
from processing.characteristics import CharSpec, trace
from processing.propagator import WindowSpec, check_admissible
from processing.solver import SolveConfig, solve, stability_limit
from processing.wpt import evaluate_wpt
from providers.base import CoefficientModel
from providers.data import DataSource, evolved, from_field, gaussian_datum, jump_gaussian_datum

logger = logging.getLogger(__name__)

Evaluator = Callable[[float], WptValue]


@dataclass(frozen=True)
class SweepConfig:
    """Geometric lambda sweep plus the decision rule applied to it"""
    lambda_min: float = LAMBDA_MIN
    lambda_max: float = LAMBDA_MAX
    count: int = LAMBDA_COUNT
    threshold: Optional[Threshold] = None

    def __post_init__(self):
        if self.count < MIN_SWEEP_COUNT:
            raise SweepTooShort(f"sweep needs at least {MIN_SWEEP_COUNT} samples, got {self.count}")
        if not 1.0 <= self.lambda_min < self.lambda_max:
            raise ContractError(f"need 1 <= lambda_min < lambda_max, got {self.lambda_min}, {self.lambda_max}")

    def lambdas(self) -> np.ndarray:
        return np.geomspace(self.lambda_min, self.lambda_max, self.count)


# Criterion evaluations

def coefficient_i(u_t0: DataSource, p: PhasePoint, lam: float, spec: WindowSpec) -> WptValue:
    """W_{phi_{0,lam}} u(t0)(x0, lam xi0)"""
    return evaluate_wpt(u_t0, spec.at(lam), p.x0, lam * p.xi0)


def _traced(coeff: CoefficientModel, t0: float, p: PhasePoint, lam: float):
    return trace(CharSpec(p.x0, t0, p.xi0, lam, coeff))


def coefficient_ii(u0: DataSource, coeff: CoefficientModel, t0: float, p: PhasePoint, lam: float,
                   spec: WindowSpec) -> WptValue:
    """
    W_{psi} u0(x(0; lam), lam xi0) with psi the window evolved back over t0.

    The returned WptValue carries x(0; lam) as its x.
    """
    check_admissible(spec.d, coeff.rho)
    path = _traced(coeff, t0, p, lam)
    return evaluate_wpt(u0, spec.at(lam), path.x_at_zero, lam * p.xi0, t0=t0)


def principal_term(u0: DataSource, coeff: CoefficientModel, t0: float, p: PhasePoint, lam: float,
                   spec: WindowSpec) -> WptValue:
    """
    e^{i Phi} coefficient_ii, Phi the transport phase along the characteristic.

    For a == 0 this reproduces coefficient_i of the evolved datum.
    """
    check_admissible(spec.d, coeff.rho)
    path = _traced(coeff, t0, p, lam)
    raw = evaluate_wpt(u0, spec.at(lam), path.x_at_zero, lam * p.xi0, t0=t0)
    return replace(raw, value=complex(np.exp(1j * np.mod(path.phase, 2.0 * np.pi)) * raw.value))


# Sweep, fit and classification

def _fit(lambdas: np.ndarray, magnitudes: np.ndarray) -> Tuple[float, float, int]:
    """Slope of -log|W| against log lam over the upper half, with R^2."""
    n = len(lambdas)
    take = max(2, n // 2)
    if n < 2:
        return float("nan"), float("nan"), 0
    x = np.log(lambdas[n - take:])
    y = -np.log(magnitudes[n - take:])
    result = linregress(x, y)
    residual = y - (result.intercept + result.slope * x)
    ss_res = float(np.sum(residual ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(result.slope), float(r2), take


def classify(fit: DecayFit, n_thr: float, margin: float = DEFAULT_MARGIN) -> Classification:
    """
    Apply, in order: underflow -> Indeterminate; decay under the resolution
    floor -> Regular; R^2 gate; then the exponent threshold with its margin.
    """
    if fit.underflow:
        return Classification.INDETERMINATE
    if fit.floor_lambda is not None:
        return Classification.REGULAR
    if not np.isfinite(fit.exponent) or not np.isfinite(fit.r2) or fit.r2 < R2_GATE:
        return Classification.INDETERMINATE
    if fit.exponent >= n_thr:
        return Classification.REGULAR
    if fit.exponent <= n_thr - margin:
        return Classification.SINGULAR
    return Classification.INDETERMINATE


def decay_sweep(evaluator: Evaluator, cfg: SweepConfig, point: Optional[PhasePoint] = None,
                threshold: Optional[Threshold] = None) -> DecayFit:
    """
    Evaluate |W| over the geometric lambda sweep and fit the decay exponent.

    The sweep stops at the first sample that falls under the resolution
    floor or that the quadrature cannot resolve; only the prefix before it
    enters the fit.

    Args:
        evaluator: lam -> WptValue
        cfg: Sweep range and count
        point: Phase point recorded on the fit
        threshold: Decision rule (defaults to cfg.threshold)

    Returns:
        DecayFit; Indeterminate when no threshold is known
    """
    threshold = threshold or cfg.threshold
    lams: List[float] = []
    values: List[WptValue] = []
    floor_lambda = None
    underflow = False

    for lam in cfg.lambdas():
        try:
            value = evaluator(float(lam))
        except (UnderResolved, UnderResolvedWindow) as e:
            logger.warning(f"Sweep truncated at lambda={lam:.4g}: {e}")
            break
        if value.scale < UNDERFLOW_FLOOR:
            underflow = True
            lams.append(float(lam))
            values.append(value)
            break
        if not value.resolved(RESOLUTION_FLOOR):
            floor_lambda = float(lam)
            break
        lams.append(float(lam))
        values.append(value)
        if value.magnitude < UNDERFLOW_FLOOR:
            underflow = True
            break

    lambdas = np.array(lams)
    magnitudes = np.array([v.magnitude for v in values])
    usable = lambdas.size if not underflow else 0
    if usable >= 2:
        exponent, r2, taken = _fit(lambdas, magnitudes)
    else:
        exponent, r2, taken = float("nan"), float("nan"), 0

    fit = DecayFit(
        lambdas=lambdas,
        magnitudes=magnitudes,
        exponent=exponent,
        r2=r2,
        classification=Classification.INDETERMINATE,
        point=point,
        x_traced=np.array([v.x for v in values]),
        values=[v.value for v in values],
        floor_lambda=floor_lambda,
        underflow=underflow,
        fit_count=taken,
    )
    if threshold is None:
        return fit
    verdict = classify(fit, threshold.n_thr, threshold.margin)
    if floor_lambda is None and not underflow and lambdas.size < MIN_SWEEP_COUNT:
        # truncated sweep: too few samples to trust the slope
        verdict = Classification.INDETERMINATE
    logger.debug(f"Sweep at {point}: N={exponent:.3f}, R2={r2:.3f}, floor={floor_lambda} -> {verdict.value}")
    return replace(fit, classification=verdict)


def threshold_from_exponents(smooth: float, singular: float,
                             min_gap: float = CALIBRATION_MIN_GAP) -> Threshold:
    """
    Midpoint threshold with a quarter-gap margin.

    Example:
        >>> threshold_from_exponents(8.0, 0.0)
        Threshold(n_thr=4.0, margin=2.0)

    Raises:
        CalibrationGapTooSmall: If the exponents are not min_gap apart
    """
    gap = smooth - singular
    if not np.isfinite(gap) or gap < min_gap:
        raise CalibrationGapTooSmall(
            f"smooth exponent {smooth:.3f} and singular exponent {singular:.3f} differ by less than {min_gap}"
        )
    return Threshold(n_thr=0.5 * (smooth + singular), margin=0.25 * gap)


def calibration_sweeps(spec: WindowSpec, cfg: SweepConfig) -> Tuple[DecayFit, DecayFit]:
    """Sweeps of the two canonical cases at t0 = 0: Gaussian and H(y)e^{-y^2}, both at (0, 1)."""
    point = PhasePoint(0.0, 1.0)
    smooth_data, jump_data = gaussian_datum(), jump_gaussian_datum()
    smooth = decay_sweep(lambda lam: coefficient_i(smooth_data, point, lam, spec), cfg, point)
    singular = decay_sweep(lambda lam: coefficient_i(jump_data, point, lam, spec), cfg, point)
    return smooth, singular


def calibrate_threshold(spec: WindowSpec, cfg: Optional[SweepConfig] = None) -> Threshold:
    """
    Place N_thr between the smooth and jump exponents of the canonical cases.

    Raises:
        CalibrationGapTooSmall: If the two exponents are less than 2 apart
    """
    cfg = cfg or SweepConfig()
    smooth, singular = calibration_sweeps(spec, cfg)
    threshold = threshold_from_exponents(smooth.exponent, singular.exponent)
    logger.info(f"Calibrated threshold N_thr={threshold.n_thr:.3f}, margin={threshold.margin:.3f} "
                f"(smooth {smooth.exponent:.3f}, jump {singular.exponent:.3f})")
    return threshold


# Solution at t0

def state_at_time(u0: DataSource, coeff: CoefficientModel, t0: float, grid: Optional[Grid1D] = None,
                  dt: float = SOLVER_DT) -> DataSource:
    """
    u(t0) as a DataSource: the exact Airy flow of the transform when a == 0,
    solver output on grid otherwise.
    """
    if t0 == 0:
        return u0
    if coeff.is_zero() and u0.has_spectrum:
        return evolved(u0, t0)
    if grid is None:
        raise ContractError("a solver grid is required to evolve data under a nonzero coefficient")
    dt = min(dt, stability_limit(grid, coeff))
    trajectory = solve(u0.sample(grid), SolveConfig(dt=dt, t_final=t0, grid=grid, coefficient=coeff,
                                                    record_stride=max(1, int(np.ceil(t0 / dt)))))
    return from_field(trajectory.final, name=f"{u0.name}@{t0:g}")


# Maps and the equivalence report

def _point_evaluator(source: DataSource, coeff: Optional[CoefficientModel], t0: float, p: PhasePoint,
                     spec: WindowSpec) -> Evaluator:
    if t0 == 0 or coeff is None:
        return lambda lam: coefficient_i(source, p, lam, spec)
    return lambda lam: coefficient_ii(source, coeff, t0, p, lam, spec)


def _map_cell(source: DataSource, coeff: Optional[CoefficientModel], t0: float, x: float, xi: float,
              spec: WindowSpec, cfg: SweepConfig) -> MapCell:
    try:
        p = PhasePoint(x, xi)
        fit = decay_sweep(_point_evaluator(source, coeff, t0, p, spec), cfg, p)
        return MapCell(x, xi, fit.exponent, fit.r2, fit.classification)
    except WavefrontError as e:
        logger.warning(f"Map cell ({x:.4g}, {xi:.4g}) failed: {e}")
        return MapCell(x, xi, float("nan"), float("nan"), Classification.INDETERMINATE, error=str(e))


def wf_map(source: DataSource, x_values: Sequence[float], xi_values: Sequence[float], spec: WindowSpec,
           cfg: SweepConfig, coeff: Optional[CoefficientModel] = None, t0: float = 0.0,
           threads: int = 1) -> WfMap:
    """
    Classify every (x, xi) cell of the grid.

    At t0 = 0 the source itself is windowed; for t0 != 0 the source is the
    initial datum and cells use the back-traced criterion with coeff. Cell
    failures are stored on the cell, not raised.
    """
    if cfg.threshold is None:
        raise ContractError("wf_map needs a threshold on the sweep config")
    xs = [float(v) for v in x_values]
    xis = [float(v) for v in xi_values]
    logger.info(f"Building WF map: {len(xs)} x {len(xis)} cells on {threads} thread(s)")
    flat = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_map_cell)(source, coeff, t0, x, xi, spec, cfg) for x in xs for xi in xis
    )
    cells = [flat[i * len(xis):(i + 1) * len(xis)] for i in range(len(xs))]
    return WfMap(x_values=np.array(xs), xi_values=np.array(xis), cells=cells)


@dataclass(frozen=True)
class EquivalenceCase:
    """Both sweeps behind one report record"""
    record: EquivalenceRecord
    fit_i: DecayFit = field(repr=False)
    fit_ii: DecayFit = field(repr=False)


def _equivalence_case(u0: DataSource, u_t0: DataSource, coeff: CoefficientModel, t0: float, p: PhasePoint,
                      spec: WindowSpec, cfg: SweepConfig) -> EquivalenceCase:
    fit_i = decay_sweep(lambda lam: coefficient_i(u_t0, p, lam, spec), cfg, p)
    fit_ii = decay_sweep(lambda lam: coefficient_ii(u0, coeff, t0, p, lam, spec), cfg, p)
    record = EquivalenceRecord(p, fit_i.classification, fit_ii.classification,
                               fit_i.exponent, fit_ii.exponent, fit_i.r2, fit_ii.r2)
    return EquivalenceCase(record, fit_i, fit_ii)


def equivalence_cases(u0: DataSource, coeff: CoefficientModel, t0: float, points: Sequence[PhasePoint],
                      spec: WindowSpec, cfg: SweepConfig, u_t0: Optional[DataSource] = None,
                      grid: Optional[Grid1D] = None, threads: int = 1) -> List[EquivalenceCase]:
    """Per-point sweeps of both criteria, in input order."""
    if cfg.threshold is None:
        raise ContractError("equivalence report needs a threshold on the sweep config")
    u_t0 = u_t0 if u_t0 is not None else state_at_time(u0, coeff, t0, grid)
    return Parallel(n_jobs=threads, prefer="threads")(
        delayed(_equivalence_case)(u0, u_t0, coeff, t0, p, spec, cfg) for p in points
    )


def equivalence_report(u0: DataSource, coeff: CoefficientModel, t0: float, points: Sequence[PhasePoint],
                       spec: WindowSpec, cfg: SweepConfig, u_t0: Optional[DataSource] = None,
                       grid: Optional[Grid1D] = None, threads: int = 1) -> EquivalenceReport:
    """
    Run criterion (i) on u(t0) and criterion (ii) on u0 at every point.

    u(t0) is taken from u_t0 when given, otherwise from state_at_time
    (exact Airy flow for a == 0, solver output on grid otherwise).
    """
    cases = equivalence_cases(u0, coeff, t0, points, spec, cfg, u_t0, grid, threads)
    report = EquivalenceReport(records=[c.record for c in cases], threshold=cfg.threshold)
    fraction = report.agreement_fraction
    logger.info(f"Equivalence at t0={t0}: {report.decisive_count}/{len(cases)} decisive, "
                f"agreement {fraction if fraction is not None else 'n/a'}")
    return report
