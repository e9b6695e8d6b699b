"""
Result records produced by the numerical pipeline
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_MARGIN
from models.errors import ContractError
from models.field import ComplexField


class Classification(str, Enum):
    """Verdict for a phase-space point"""
    REGULAR = "Regular"
    SINGULAR = "Singular"
    INDETERMINATE = "Indeterminate"

    @property
    def decisive(self) -> bool:
        return self is not Classification.INDETERMINATE


@dataclass(frozen=True)
class PhasePoint:
    """A point (x0, xi0) of R x (R minus 0)"""
    x0: float
    xi0: float

    def __post_init__(self):
        if self.xi0 == 0 or not np.isfinite(self.xi0) or not np.isfinite(self.x0):
            raise ContractError(f"phase point needs finite x0 and nonzero xi0, got ({self.x0}, {self.xi0})")


@dataclass(frozen=True)
class Threshold:
    """Decision rule on fitted exponents"""
    n_thr: float
    margin: float = DEFAULT_MARGIN


@dataclass(frozen=True)
class DecayReport:
    """Sampled check of |d_t^l1 d_x^l2 a| <= C (1+|x|)^(-rho-l1-l2)"""
    ratios: Dict[Tuple[int, int], float]
    sample_counts: Dict[Tuple[int, int], int]
    rho: float

    @property
    def passed(self) -> bool:
        return all(r <= 1.0 for r in self.ratios.values())

    @property
    def worst_ratio(self) -> float:
        return max(self.ratios.values()) if self.ratios else 0.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded solver output; histories are aligned with times"""
    times: np.ndarray
    snapshots: List[ComplexField]
    l2_history: np.ndarray
    mass_history: np.ndarray
    h3_history: np.ndarray
    # cumulative integral of int a_x |u|^2 dx over [0, t]
    dissipation_history: np.ndarray
    gronwall_rate: float

    @property
    def energy_residual(self) -> float:
        """|(||u(T)||^2 - ||u0||^2) + int_0^T int a_x |u|^2| relative to ||u0||^2."""
        initial = self.l2_history[0] ** 2
        if initial == 0:
            return 0.0
        change = self.l2_history[-1] ** 2 - initial
        return float(abs(change + self.dissipation_history[-1]) / initial)

    @property
    def final(self) -> ComplexField:
        return self.snapshots[-1]


@dataclass(frozen=True, eq=False)
class CharPath:
    """
    Backward-traced characteristic x(t; lambda) on [0, t0].

    times ascend from 0 to t0; positions[-1] == x0 exactly.
    phase is the transport phase int_0^t0 (lam^3 xi^3 - lam xi a) dt.
    iterate_gaps holds sup |x_{k+1} - x_k| per Picard iteration (empty for trace).
    """
    times: np.ndarray
    positions: np.ndarray
    x_at_zero: float
    phase: float = 0.0
    error_estimate: float = 0.0
    far_field_radius: float = float("inf")
    iterate_gaps: Tuple[float, ...] = ()

    def position(self, s) -> np.ndarray:
        return np.interp(s, self.times, self.positions)


@dataclass(frozen=True)
class WptValue:
    """W(x, xi) with its quadrature error estimate and integrand mass"""
    value: complex
    error: float
    x: float = 0.0
    xi: float = 0.0
    scale: float = 0.0
    path: str = "physical"

    @property
    def magnitude(self) -> float:
        return float(abs(self.value))

    def resolved(self, floor: float) -> bool:
        """True when |W| stands above the quadrature resolution floor."""
        return self.magnitude > floor * self.scale + self.error


@dataclass(frozen=True, eq=False)
class DecayFit:
    """Lambda sweep record with fitted decay exponent"""
    lambdas: np.ndarray
    magnitudes: np.ndarray
    exponent: float
    r2: float
    classification: Classification
    point: Optional[PhasePoint] = None
    x_traced: Optional[np.ndarray] = None
    values: List[complex] = field(default_factory=list)
    # first lambda whose sample fell under the resolution floor
    floor_lambda: Optional[float] = None
    underflow: bool = False
    fit_count: int = 0

    def summary(self) -> Dict[str, object]:
        return {
            "exponent": self.exponent,
            "r2": self.r2,
            "class": self.classification.value,
            "floor_lambda": self.floor_lambda,
        }


@dataclass(frozen=True)
class MapCell:
    """One (x, xi) entry of a wave front map"""
    x: float
    xi: float
    exponent: float
    r2: float
    classification: Classification
    error: Optional[str] = None


@dataclass(frozen=True, eq=False)
class WfMap:
    """Classification grid over positions x directions"""
    x_values: np.ndarray
    xi_values: np.ndarray
    cells: List[List[MapCell]]

    def __post_init__(self):
        if len(self.cells) != len(self.x_values) or any(len(row) != len(self.xi_values) for row in self.cells):
            raise ContractError("map cells do not match the x/xi grid dimensions")

    def classes(self) -> np.ndarray:
        return np.array([[c.classification.value for c in row] for row in self.cells])

    def flat(self) -> List[MapCell]:
        return [c for row in self.cells for c in row]


@dataclass(frozen=True)
class EquivalenceRecord:
    """Both criteria at one phase point"""
    point: PhasePoint
    class_i: Classification
    class_ii: Classification
    exponent_i: float
    exponent_ii: float
    r2_i: float
    r2_ii: float

    @property
    def decisive(self) -> bool:
        return self.class_i.decisive and self.class_ii.decisive

    @property
    def agrees(self) -> bool:
        return self.class_i == self.class_ii


@dataclass(frozen=True)
class EquivalenceReport:
    records: List[EquivalenceRecord]
    threshold: Threshold

    @property
    def decisive_count(self) -> int:
        return sum(1 for r in self.records if r.decisive)

    @property
    def agreement_fraction(self) -> Optional[float]:
        decisive = [r for r in self.records if r.decisive]
        if not decisive:
            return None
        return sum(1 for r in decisive if r.agrees) / len(decisive)


@dataclass(frozen=True)
class EscapeBoundReport:
    """Escape-bound sweep: |x(s)| >= (3 / 2b^2) lam^2 |s - t0|"""
    lambda0: Optional[float]
    worst_ratio: float
    samples: int
    failures: int
    failing_lambdas: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "lambda0": self.lambda0,
            "worst_ratio": self.worst_ratio,
            "samples": self.samples,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one self-verification check"""
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
