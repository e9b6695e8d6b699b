"""
Configuration settings for wavefront-kdv
"""
import os
from typing import Dict, List
from dotenv import load_dotenv

load_dotenv()

# Log Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_DIR = os.getenv("LOG_DIR", "logs")
LOG_FILE = "wavefront_kdv.log"

# Worker pool size for maps and sweeps (--threads overrides)
WAVEFRONT_KDV_THREADS = int(os.getenv("WAVEFRONT_KDV_THREADS", "1"))

# Coefficient defaults
DEFAULT_RHO = float(os.getenv("DEFAULT_RHO", "0.25"))
SOLITON_AMPLITUDE = 12.0
SOLITON_WIDTH = 1.0
SOLITON_SPEED = 4.0

# Window defaults
DEFAULT_D = float(os.getenv("DEFAULT_D", "0.375"))
DEFAULT_BASE_WINDOW = os.getenv("DEFAULT_BASE_WINDOW", "gaussian")
WINDOW_GUARD_CELLS = 4  # scaled window must span this many grid cells
WINDOW_BAND_SIGMAS = float(os.getenv("WINDOW_BAND_SIGMAS", "9.0"))

# Lambda sweep: lambda_k = 2^(k/2), k = 0..12
LAMBDA_MIN = float(os.getenv("LAMBDA_MIN", "1.0"))
LAMBDA_MAX = float(os.getenv("LAMBDA_MAX", "64.0"))
LAMBDA_COUNT = int(os.getenv("LAMBDA_COUNT", "13"))
MIN_SWEEP_COUNT = 6

# Classification
R2_GATE = float(os.getenv("R2_GATE", "0.9"))
UNDERFLOW_FLOOR = 1e-280
RESOLUTION_FLOOR = float(os.getenv("RESOLUTION_FLOOR", "1e-12"))
DEFAULT_MARGIN = float(os.getenv("DEFAULT_MARGIN", "2.0"))
CALIBRATION_MIN_GAP = float(os.getenv("CALIBRATION_MIN_GAP", "2.0"))

# Wave packet transform quadrature
WPT_MAX_NODES = int(os.getenv("WPT_MAX_NODES", str(2 ** 22)))
WPT_MAX_REFINEMENTS = int(os.getenv("WPT_MAX_REFINEMENTS", "4"))
WPT_RTOL = float(os.getenv("WPT_RTOL", "1e-10"))
GAUSS_PANEL_ORDER = 16        # Gauss-Legendre nodes per panel near breakpoints

# Characteristics
CHAR_RTOL = float(os.getenv("CHAR_RTOL", "1e-10"))
CHAR_ATOL = float(os.getenv("CHAR_ATOL", "1e-12"))
FAR_FIELD_LEVEL = 1e-14
FAR_FIELD_SEARCH_LIMIT = 1e6
PICARD_TOL = float(os.getenv("PICARD_TOL", "1e-8"))
PICARD_MAX_ITER = int(os.getenv("PICARD_MAX_ITER", "60"))
PICARD_NODES = int(os.getenv("PICARD_NODES", "65537"))
PICARD_STALL_WINDOW = 5

# Solver defaults
SOLVER_L = float(os.getenv("SOLVER_L", "100.0"))
SOLVER_N = int(os.getenv("SOLVER_N", "16384"))
SOLVER_DT = float(os.getenv("SOLVER_DT", "2e-4"))
SOLVER_T = float(os.getenv("SOLVER_T", "1.0"))
SOLVER_STRIDE = int(os.getenv("SOLVER_STRIDE", "50"))
DEALIAS_FRACTION = 2.0 / 3.0
STABILITY_CAP = 1e-2
# |u| at the box edge, relative to sup |u0|, at which a solve is abandoned
SOLVER_BOUNDARY_LIMIT = float(os.getenv("SOLVER_BOUNDARY_LIMIT", "1e-3"))

# Decay checker
TIME_FD_STEP = 1e-4

BASE_WINDOWS: List[str] = ["gaussian", "sech", "sech2", "bump"]

SUBCOMMANDS: List[str] = ["solve", "detect", "map", "trace", "verify", "soliton-info"]

# CLI exit codes
EXIT_CODES: Dict[str, int] = {
    "ok": 0,
    "verify_failed": 1,
    "config": 2,
    "numeric": 3,
}
