"""
Run configuration: plain-text `key = value` files with dotted sections

    # comment
    coeff.kind = soliton
    detector.points = 0:1, 2:-1
    detector.xi = 1, -1

Values stay strings until the pydantic models coerce them. Unknown keys and
out-of-range values raise ConfigError naming the dotted key.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.settings import (
    DEFAULT_BASE_WINDOW,
    DEFAULT_D,
    DEFAULT_MARGIN,
    DEFAULT_RHO,
    LAMBDA_COUNT,
    LAMBDA_MAX,
    LAMBDA_MIN,
    MIN_SWEEP_COUNT,
    SOLITON_AMPLITUDE,
    SOLITON_SPEED,
    SOLITON_WIDTH,
    SOLVER_DT,
    SOLVER_L,
    SOLVER_N,
    SOLVER_STRIDE,
    SOLVER_T,
)
from models.errors import ConfigError, ContractError, WavefrontError
from models.field import Grid1D, is_power_of_two
from models.results import PhasePoint, Threshold

logger = logging.getLogger(__name__)


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return value


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class GridBlock(_Block):
    L: float = Field(50.0, gt=0)
    N: int = Field(2048, ge=16)


class CoeffBlock(_Block):
    kind: Literal["zero", "soliton", "custom"] = "zero"
    c: float = SOLITON_AMPLITUDE
    b: float = SOLITON_WIDTH
    speed: float = SOLITON_SPEED
    x0: float = 0.0
    rho: float = Field(DEFAULT_RHO, gt=0)
    a_nl: Optional[float] = None
    gamma: Optional[float] = Field(None, gt=0)


class SolverBlock(_Block):
    dt: float = Field(SOLVER_DT, gt=0)
    T: float = Field(SOLVER_T, ge=0)
    L: float = Field(SOLVER_L, gt=0)
    N: int = Field(SOLVER_N, ge=16)
    stride: int = Field(SOLVER_STRIDE, ge=1)


class WindowBlock(_Block):
    d: float = Field(DEFAULT_D, gt=0)
    base: Literal["gaussian", "sech", "sech2", "bump"] = DEFAULT_BASE_WINDOW


class DetectorBlock(_Block):
    lambda_min: float = Field(LAMBDA_MIN, ge=1)
    lambda_max: float = LAMBDA_MAX
    count: int = Field(LAMBDA_COUNT, ge=MIN_SWEEP_COUNT)
    n_thr: Optional[float] = None
    margin: float = Field(DEFAULT_MARGIN, gt=0)
    t0: float = 0.0
    points: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.0, 1.0)])
    x_min: float = -4.0
    x_max: float = 4.0
    x_count: int = Field(9, ge=1)
    xi: List[float] = Field(default_factory=lambda: [1.0, -1.0])

    @field_validator("points", mode="before")
    @classmethod
    def _pairs(cls, value):
        items = _split(value)
        if isinstance(items, list) and items and isinstance(items[0], str):
            pairs = []
            for item in items:
                parts = item.split(":")
                if len(parts) != 2:
                    raise ValueError(f"phase point '{item}' must be written x:xi")
                pairs.append((parts[0], parts[1]))
            return pairs
        return items

    @field_validator("xi", mode="before")
    @classmethod
    def _directions(cls, value):
        return _split(value)

    @field_validator("xi")
    @classmethod
    def _nonzero(cls, value):
        if any(v == 0 for v in value):
            raise ValueError("directions must be nonzero")
        return value


class DataBlock(_Block):
    kind: Literal["zero", "gaussian", "jump_gaussian", "backward_evolved_jump", "file"] = "gaussian"
    path: Optional[str] = None
    t_sched: float = 0.3


class TraceBlock(_Block):
    x0: float = 0.0
    t0: float = 1.0
    xi: float = 1.0
    lam: float = Field(10.0, ge=1, alias="lambda")


class OutputBlock(_Block):
    dir: str = "output"


class RunConfig(_Block):
    """Validated run configuration"""
    grid: GridBlock = Field(default_factory=GridBlock)
    coeff: CoeffBlock = Field(default_factory=CoeffBlock)
    solver: SolverBlock = Field(default_factory=SolverBlock)
    window: WindowBlock = Field(default_factory=WindowBlock)
    detector: DetectorBlock = Field(default_factory=DetectorBlock)
    data: DataBlock = Field(default_factory=DataBlock)
    trace: TraceBlock = Field(default_factory=TraceBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    # Builders

    def coefficient(self):
        from providers.soliton import SolitonCoefficient, soliton_from_ratio
        from providers.zero import ZeroCoefficient

        block = self.coeff
        if block.kind == "zero":
            return ZeroCoefficient(rho=block.rho)
        if block.kind == "soliton":
            if block.a_nl is not None:
                return soliton_from_ratio(block.a_nl, block.gamma or 1.0, block.b, block.x0, rho=block.rho)
            return SolitonCoefficient(block.c, block.b, block.speed, block.x0, rho=block.rho)
        raise ConfigError("coeff.kind = custom needs a Python closure; use the WavefrontAnalyzer API",
                          keys=["coeff.kind"])

    def solver_grid(self) -> Grid1D:
        return Grid1D(self.solver.L, self.solver.N)

    def map_grid(self) -> Grid1D:
        return Grid1D(self.grid.L, self.grid.N)

    def data_source(self):
        from providers import data

        kind = self.data.kind
        if kind == "file":
            return data.from_file(self.data.path)
        if kind == "backward_evolved_jump":
            return data.backward_evolved_jump_datum(self.data.t_sched)
        return {
            "zero": data.zero_datum,
            "gaussian": data.gaussian_datum,
            "jump_gaussian": data.jump_gaussian_datum,
        }[kind]()

    def window_spec(self):
        from processing.propagator import WindowSpec
        return WindowSpec.named(self.window.base, self.window.d)

    def phase_points(self) -> List[PhasePoint]:
        return [PhasePoint(x, xi) for x, xi in self.detector.points]

    def x_values(self) -> np.ndarray:
        return np.linspace(self.detector.x_min, self.detector.x_max, self.detector.x_count)

    def fixed_threshold(self) -> Optional[Threshold]:
        if self.detector.n_thr is None:
            return None
        return Threshold(self.detector.n_thr, self.detector.margin)

    def sweep_config(self, threshold: Optional[Threshold] = None):
        from processing.detector import SweepConfig
        return SweepConfig(self.detector.lambda_min, self.detector.lambda_max, self.detector.count,
                           threshold or self.fixed_threshold())

    def needs_solver(self) -> bool:
        """Criterion (i) reads solver output unless u(t0) has a closed form."""
        return self.coeff.kind != "zero" or self.data.kind == "file"

    def canonical(self) -> Dict[str, Any]:
        """Plain nested dict with sorted keys, the input of the config digest."""
        return self.model_dump(mode="json", by_alias=True)


# Parsing

def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Dict[str, str]]:
    """
    Split `section.key = value` lines into a nested dict of raw strings.

    Raises:
        ConfigError: On malformed lines, undotted keys or repeated keys
    """
    nested: Dict[str, Dict[str, str]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        parts = key.split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"{source}:{number}: key '{key}' must be section.name", keys=[key])
        section, name = parts
        if name in nested.setdefault(section, {}):
            raise ConfigError(f"{source}:{number}: key '{key}' given twice", keys=[key])
        nested[section][name] = value
    return nested


def _error_keys(error: ValidationError) -> List[str]:
    keys = []
    for item in error.errors():
        key = ".".join(str(p) for p in item["loc"] if not isinstance(p, int))
        if key and key not in keys:
            keys.append(key)
    return keys


def build_config(values: Dict[str, Dict[str, Any]]) -> RunConfig:
    """
    Validate nested values and run the cross-field checks.

    Raises:
        ConfigError: Naming every offending dotted key
    """
    try:
        cfg = RunConfig.model_validate(values)
    except ValidationError as e:
        keys = _error_keys(e)
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"Invalid configuration ({', '.join(keys)}): {details}", keys=keys) from e
    cross_check(cfg)
    return cfg


def load_config(path: Union[str, Path, None] = None) -> RunConfig:
    """Read and validate a config file; None gives the defaults."""
    if path is None:
        return build_config({})
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    cfg = build_config(parse_config_text(text, str(path)))
    logger.info(f"Loaded configuration from {path}")
    return cfg


def cross_check(cfg: RunConfig) -> None:
    """
    Checks spanning several keys: window admissibility, sweep range, solver
    grid and step, data file presence and the Nyquist guard on solver output.
    """
    from processing.propagator import check_admissible
    from processing.solver import stability_limit

    det = cfg.detector
    if not det.lambda_min < det.lambda_max:
        raise ConfigError(f"detector.lambda_min={det.lambda_min} must be below detector.lambda_max={det.lambda_max}",
                          keys=["detector.lambda_min", "detector.lambda_max"])
    if any(xi == 0 for _, xi in det.points):
        raise ConfigError("detector.points need nonzero xi", keys=["detector.points"])
    if det.x_min > det.x_max:
        raise ConfigError("detector.x_min exceeds detector.x_max", keys=["detector.x_min", "detector.x_max"])

    try:
        check_admissible(cfg.window.d, cfg.coeff.rho)
    except ContractError as e:
        raise ConfigError(str(e), keys=["window.d", "coeff.rho"]) from e

    for section in ("solver", "grid"):
        n = getattr(cfg, section).N
        if not is_power_of_two(n):
            raise ConfigError(f"{section}.N={n} must be a power of two", keys=[f"{section}.N"])

    if cfg.data.kind == "file" and not cfg.data.path:
        raise ConfigError("data.kind = file needs data.path", keys=["data.path"])

    if cfg.coeff.kind == "soliton":
        if cfg.coeff.a_nl == 0:
            raise ConfigError("coeff.a_nl must be nonzero", keys=["coeff.a_nl"])
        if cfg.coeff.b == 0:
            raise ConfigError("coeff.b must be nonzero", keys=["coeff.b"])

    try:
        coeff = cfg.coefficient()
    except WavefrontError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), keys=["coeff.kind"]) from e

    grid = cfg.solver_grid()
    limit = stability_limit(grid, coeff)
    if cfg.solver.dt > limit:
        raise ConfigError(f"solver.dt={cfg.solver.dt} exceeds the stability limit {limit:.4g}", keys=["solver.dt"])

    if cfg.needs_solver():
        check_nyquist_guard(cfg)


def check_nyquist_guard(cfg: RunConfig, directions: Optional[Iterable[float]] = None) -> None:
    """
    Require lambda_max * max|xi| <= pi/(4h) on the solver grid.

    directions defaults to the xi values of detector.points and detector.xi.

    Raises:
        ConfigError: If the sweep reaches past the guard
    """
    det = cfg.detector
    if directions is None:
        directions = [xi for _, xi in det.points] + list(det.xi)
    reach = det.lambda_max * max(abs(v) for v in directions)
    guard = np.pi / (4.0 * cfg.solver_grid().spacing)
    if reach > guard:
        raise ConfigError(
            f"detector.lambda_max * max|xi| = {reach:.4g} exceeds the solver-grid guard pi/(4h) = {guard:.4g}",
            keys=["detector.lambda_max"],
        )


__all__ = [
    "RunConfig",
    "build_config",
    "check_nyquist_guard",
    "cross_check",
    "load_config",
    "parse_config_text",
]
