# config/tolerances.py
from typing import Dict

import numpy as np

# Quadrature
GAUSS_ORDER: int = 20
DEFAULT_PANELS: int = 32
PANELS_PER_PERIOD: int = 10
SIGN_SCAN_POINTS: int = 4096

# Phase integration
PHASE_RTOL: float = 1e-11
PHASE_ATOL: float = 1e-12
MIN_STEP: float = 1e-13
MAX_PHASE_INCREMENT: float = 0.785  # just under pi/4

# Eigenvalue search
MISSDISTANCE_TOL: float = 1e-10
BRACKET_HALF_WIDTH: float = 0.45
BRACKET_MAX_EXPANSION: float = 3.0
BRACKET_EXPANSION_STEP: float = 0.25
NODE_PHASE_TOL: float = 1e-12
# brentq rejects rtol below 4 * machine epsilon
ROOT_RTOL: float = 4.0 * float(np.finfo(float).eps)

# Volterra sweeps
VOLTERRA_SAMPLES: int = 8193
VOLTERRA_TOL: float = 1e-10
VOLTERRA_MAX_ITER: int = 200

# Quasinodal classification (Case I / Case II patterns)
CLASSIFY: Dict[str, float] = {
    "min_levels": 5,
    "window": 5,
    "max_over_median": 10.0,
    "max_log_slope": 0.5,
    "zero_floor": 1e-5,
    "warp_degree": 5,
}

# Metrics
LIMSUP_WINDOW: int = 8
