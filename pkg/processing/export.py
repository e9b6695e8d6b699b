"""
CSV / JSON emission with config digests
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from models.field import ComplexField
from models.results import CharPath, DecayFit, EquivalenceReport, EscapeBoundReport, Trajectory, WfMap

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def config_digest(config: Mapping[str, Any]) -> str:
    """sha256 of the canonical (sorted, compact) JSON of a config dict."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, NaN/Inf to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def write_json(path: PathLike, payload: Dict[str, Any], digest: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if digest is not None:
        body["config_digest"] = digest
    path.write_text(json.dumps(_clean(body), sort_keys=True, indent=2) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]],
              digest: Optional[str] = None) -> Path:
    """Rows of floats (.17g) or strings under a header, digest as first comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines: List[str] = []
    if digest is not None:
        lines.append(f"# config_digest={digest}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote {path} ({len(lines) - 1 - (digest is not None)} rows)")
    return path


def write_field_csv(path: PathLike, u: ComplexField, digest: Optional[str] = None) -> Path:
    """`x,re,im` dump, readable by providers.data.from_file."""
    rows = zip(u.grid.nodes, u.samples.real, u.samples.imag)
    return write_csv(path, ("x", "re", "im"), rows, digest)


def write_trajectory(out_dir: PathLike, trajectory: Trajectory, digest: Optional[str] = None) -> Path:
    """Snapshot CSVs plus trajectory.json listing them."""
    out_dir = Path(out_dir)
    names = []
    for i, snap in enumerate(trajectory.snapshots):
        name = f"field_{i:04d}.csv"
        write_field_csv(out_dir / name, snap, digest)
        names.append(name)
    payload = {
        "times": trajectory.times,
        "l2": trajectory.l2_history,
        "mass_re": trajectory.mass_history.real,
        "mass_im": trajectory.mass_history.imag,
        "h3": trajectory.h3_history,
        "dissipation": trajectory.dissipation_history,
        "energy_residual": trajectory.energy_residual,
        "gronwall_rate": trajectory.gronwall_rate,
        "snapshots": names,
    }
    return write_json(out_dir / "trajectory.json", payload, digest)


def write_sweep_csv(path: PathLike, fit: DecayFit, digest: Optional[str] = None) -> Path:
    xs = fit.x_traced if fit.x_traced is not None else np.full(fit.lambdas.size, np.nan)
    rows = [(lam, x, abs(w), w.real, w.imag) for lam, x, w in zip(fit.lambdas, xs, fit.values)]
    return write_csv(path, ("lambda", "x_traced", "abs_w", "re_w", "im_w"), rows, digest)


def write_map_csv(path: PathLike, wf: WfMap, digest: Optional[str] = None) -> Path:
    rows = [(c.x, c.xi, c.exponent, c.r2, c.classification.value) for c in wf.flat()]
    return write_csv(path, ("x", "xi", "exponent", "r2", "class"), rows, digest)


def write_trace_csv(path: PathLike, path_data: CharPath, digest: Optional[str] = None) -> Path:
    return write_csv(path, ("t", "x"), zip(path_data.times, path_data.positions), digest)


def report_payload(report: EquivalenceReport) -> Dict[str, Any]:
    return {
        "records": [
            {
                "x0": r.point.x0,
                "xi0": r.point.xi0,
                "class_i": r.class_i.value,
                "class_ii": r.class_ii.value,
                "exponent_i": r.exponent_i,
                "exponent_ii": r.exponent_ii,
                "r2_i": r.r2_i,
                "r2_ii": r.r2_ii,
            }
            for r in report.records
        ],
        "agreement_fraction": report.agreement_fraction,
        "decisive_count": report.decisive_count,
        "threshold": {"n_thr": report.threshold.n_thr, "margin": report.threshold.margin},
    }


def write_report_json(path: PathLike, report: EquivalenceReport, digest: Optional[str] = None) -> Path:
    return write_json(path, report_payload(report), digest)


def write_escape_bound_json(path: PathLike, report: EscapeBoundReport, digest: Optional[str] = None) -> Path:
    return write_json(path, report.to_dict(), digest)
