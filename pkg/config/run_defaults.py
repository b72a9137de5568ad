# config/run_defaults.py
APP_TITLE = "pencil-lab"
FORMAT_VERSION = 1

CACHE_DIR_ENV = "PENCIL_LAB_CACHE_DIR"
LOG_LEVEL_ENV = "PENCIL_LAB_LOG_LEVEL"
DEFAULT_CACHE_DIR = ".pencil_cache"
DEFAULT_OUTPUT_DIR = "out"

DEFAULT_N_MIN = 8
DEFAULT_N_MAX = 64
DEFAULT_GRID_SIZE = 512
DEFAULT_WORKERS = 1
DEFAULT_M_MAX = 1
DEFAULT_H_INDEX = 1

CSV_FLOAT_FORMAT = "%.12g"
CACHE_FLOAT_FORMAT = "%.17g"

# Continuity points used by the pointwise convergence columns
PROBE_POINTS = (0.5, 1.0, 1.5, 2.0, 2.5)
