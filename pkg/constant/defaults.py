DEFAULT_SEED = 20240101
DEFAULT_TRIALS = 100
DEFAULT_MAXDEG = 3
DEFAULT_N = 2
DEFAULT_TRUNCATION = 3

# Random polynomial shape
COEFF_MIN = -3
COEFF_MAX = 3
MAX_TERMS = 3

# Sign search needs enough trials to separate the 64 assignments
MIN_SEARCH_TRIALS = 50

TOOL_VERSION = "0.1.0"
LOG_FILE_ENV = "VERTEX_ALGEBROIDS_LOG"
