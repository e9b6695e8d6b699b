"""
Main API interface for wavefront-kdv
"""
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np

from config.loader import RunConfig, check_nyquist_guard, load_config
from config.settings import WAVEFRONT_KDV_THREADS
from models.errors import ConfigError
from models.results import EquivalenceReport, Threshold
from processing import export
from processing.characteristics import CharSpec, escape_bound_check, trace
from processing.coefficient import kdv_residual, sampled_decay_constants, verify_decay
from processing.detector import calibrate_threshold, equivalence_cases, state_at_time, wf_map
from processing.solver import SolveConfig, solve
from processing.verify import SUITE_DIRECTIONS, VerifyContext, run_checks
from providers.base import CoefficientModel
from providers.data import DataSource
from providers.soliton import SolitonCoefficient, soliton_from_ratio

logger = logging.getLogger(__name__)


class WavefrontAnalyzer:
    """
    Public API: wires a RunConfig into the pipeline and returns plain dicts.

    The coefficient and datum come from the config unless given explicitly,
    which is how user closures (CustomCoefficient, custom DataSource) enter.
    """

    def __init__(
        self,
        config: Union[RunConfig, str, Path, None] = None,
        threads: Optional[int] = None,
        coefficient: Optional[CoefficientModel] = None,
        data: Optional[DataSource] = None,
        threshold: Optional[Threshold] = None,
    ):
        self.config = config if isinstance(config, RunConfig) else load_config(config)
        self.threads = self._validate_threads(threads)
        self._coefficient = coefficient
        self._data = data
        self._threshold = threshold
        self.digest = export.config_digest(self.config.canonical())
        logger.info(f"Analyzer ready (config digest {self.digest[:12]}, {self.threads} thread(s))")

    @staticmethod
    def _validate_threads(threads: Optional[int]) -> int:
        value = WAVEFRONT_KDV_THREADS if threads is None else threads
        if not isinstance(value, int) or value < 1:
            raise ConfigError(f"thread count must be a positive integer, got {value!r}", keys=["--threads"])
        return value

    @property
    def coefficient(self) -> CoefficientModel:
        if self._coefficient is None:
            self._coefficient = self.config.coefficient()
        return self._coefficient

    @property
    def data(self) -> DataSource:
        if self._data is None:
            self._data = self.config.data_source()
        return self._data

    def _out(self, out_dir: Union[str, Path, None]) -> Path:
        return Path(out_dir or self.config.output.dir)

    def threshold(self) -> Threshold:
        """Configured threshold, else calibrated once on the canonical cases."""
        if self._threshold is None:
            self._threshold = self.config.fixed_threshold() or calibrate_threshold(
                self.config.window_spec(), self.config.sweep_config()
            )
        return self._threshold

    def solve(self, out_dir: Union[str, Path, None] = None) -> Dict[str, Any]:
        """
        March the configured datum to solver.T and write the trajectory.

        Returns:
            Dictionary with the norm history summary, energy residual and
            the path of trajectory.json
        """
        cfg = self.config.solver
        grid = self.config.solver_grid()
        u0 = self.data.sample(grid)
        trajectory = solve(u0, SolveConfig(dt=cfg.dt, t_final=cfg.T, grid=grid,
                                           coefficient=self.coefficient, record_stride=cfg.stride))
        path = export.write_trajectory(self._out(out_dir), trajectory, self.digest)
        return {
            "l2_initial": float(trajectory.l2_history[0]),
            "l2_final": float(trajectory.l2_history[-1]),
            "energy_residual": trajectory.energy_residual,
            "gronwall_rate": trajectory.gronwall_rate,
            "snapshots": len(trajectory.snapshots),
            "trajectory": str(path),
        }

    def detect(self, out_dir: Union[str, Path, None] = None) -> Dict[str, Any]:
        """
        Run both criteria at every configured phase point.

        Writes one sweep CSV per point and criterion plus report.json.

        Example:
            >>> result = WavefrontAnalyzer(cfg).detect("out")
            >>> result["records"][0]["class_i"]
            'Singular'
        """
        det = self.config.detector
        out = self._out(out_dir)
        sweep = self.config.sweep_config(self.threshold())
        u_t0 = state_at_time(self.data, self.coefficient, det.t0, self.config.solver_grid(), self.config.solver.dt)
        cases = equivalence_cases(self.data, self.coefficient, det.t0, self.config.phase_points(),
                                  self.config.window_spec(), sweep, u_t0=u_t0, threads=self.threads)
        report = EquivalenceReport(records=[c.record for c in cases], threshold=sweep.threshold)
        files: List[str] = []
        for k, case in enumerate(cases):
            files.append(str(export.write_sweep_csv(out / f"sweep_{k:02d}_i.csv", case.fit_i, self.digest)))
            files.append(str(export.write_sweep_csv(out / f"sweep_{k:02d}_ii.csv", case.fit_ii, self.digest)))
        files.append(str(export.write_report_json(out / "report.json", report, self.digest)))

        payload = export.report_payload(report)
        payload["files"] = files
        logger.info(f"Detect finished: agreement {report.agreement_fraction}")
        return payload

    def map(self, out_dir: Union[str, Path, None] = None) -> Dict[str, Any]:
        """Classification map over detector.x_* positions and detector.xi directions."""
        det = self.config.detector
        sweep = self.config.sweep_config(self.threshold())
        wf = wf_map(self.data, self.config.x_values(), det.xi, self.config.window_spec(), sweep,
                    coeff=self.coefficient, t0=det.t0, threads=self.threads)
        path = export.write_map_csv(self._out(out_dir) / "map.csv", wf, self.digest)
        return {
            "x": wf.x_values.tolist(),
            "xi": wf.xi_values.tolist(),
            "classes": wf.classes().tolist(),
            "failed_cells": sum(1 for c in wf.flat() if c.error),
            "map": str(path),
        }

    def trace(self, out_dir: Union[str, Path, None] = None) -> Dict[str, Any]:
        """Backward characteristic from (trace.t0, trace.x0) plus the escape-bound sweep."""
        block = self.config.trace
        spec = CharSpec(block.x0, block.t0, block.xi, block.lam, self.coefficient)
        path = trace(spec)
        out = self._out(out_dir)
        csv_path = export.write_trace_csv(out / "trace.csv", path, self.digest)

        escape = None
        if block.t0 > 0:
            b = max(2.0, abs(block.xi), 1.0 / abs(block.xi))
            report = escape_bound_check(b, 1.5, np.geomspace(1.0, 64.0, 8),
                                        np.linspace(block.x0 - 5.0, block.x0 + 5.0, 20),
                                        [block.xi], self.coefficient, t0=block.t0)
            export.write_escape_bound_json(out / "escape_bound.json", report, self.digest)
            escape = report.to_dict()

        return {
            "x_at_zero": path.x_at_zero,
            "phase": path.phase,
            "error_estimate": path.error_estimate,
            "far_field_radius": path.far_field_radius,
            "escape_bound": escape,
            "trace": str(csv_path),
        }

    def verify(self, names: Optional[Iterable[str]] = None, inject_sign_flip: bool = False) -> Dict[str, Any]:
        """
        Run the self-verification checks; passed is True iff all pass.

        Raises:
            ConfigError: If detector.lambda_max passes the solver-grid Nyquist guard
        """
        check_nyquist_guard(self.config, SUITE_DIRECTIONS)
        ctx = VerifyContext(threads=self.threads, sweep=self.config.sweep_config(),
                            solver_grid=self.config.solver_grid())
        results = run_checks(names, inject_sign_flip=inject_sign_flip, ctx=ctx)
        return {
            "passed": all(r.passed for r in results),
            "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds}
                       for r in results],
        }

    def soliton_info(self) -> Dict[str, Any]:
        """
        Parameters and diagnostics of the configured soliton (the canonical
        c = 12, b = 1, s = 4 one when the config has none).
        """
        model = self.coefficient
        if not isinstance(model, SolitonCoefficient):
            logger.info("No soliton configured; reporting the canonical soliton")
            model = soliton_from_ratio(1.0, 1.0, 1.0)
        a_nl = model.nonlinearity if model.nonlinearity is not None else 12.0 * model.width ** 2 / model.amplitude
        gamma = model.dispersion or 1.0
        grid = self.config.map_grid()
        decay = verify_decay(model.with_constants(_sampled_constants(model)), np.linspace(0.0, 1.0, 5),
                             np.linspace(-grid.half_length, grid.half_length, 801))
        return {
            "c": model.amplitude,
            "b": model.width,
            "s": model.speed,
            "x0": model.offset,
            "a_nl": a_nl,
            "gamma": gamma,
            "ratio_check": abs(model.amplitude * a_nl - 12.0 * model.width ** 2 * gamma),
            "kdv_residual": {str(t): kdv_residual(model, grid, t, a_nl, gamma) for t in (0.0, 1.0)},
            "far_field_radius": model.far_field_radius(0.0, 1.0),
            "decay": {"passed": decay.passed, "worst_ratio": decay.worst_ratio, "rho": decay.rho},
        }


def _sampled_constants(model: CoefficientModel):
    return sampled_decay_constants(model, np.linspace(0.0, 1.0, 11), np.linspace(-60.0, 60.0, 1201))
