"""Constants for the specres solver library."""

DOMAIN = "specres"

# Environment
ENV_SEED = "SPECRES_SEED"
DEFAULT_SEED = 0

# Steplength rule labels
RULE_BB1 = "BB1"
RULE_BB2 = "BB2"
RULE_ALT = "ALT"
RULE_ABB01 = "ABB01"
RULE_ABB08 = "ABB08"
RULE_ABBM01 = "ABBm01"
RULE_ABBM08 = "ABBm08"
RULE_DABBM = "DABBm"
RULE_NAMES = [
    RULE_BB1,
    RULE_BB2,
    RULE_ALT,
    RULE_ABB01,
    RULE_ABB08,
    RULE_ABBM01,
    RULE_ABBM08,
    RULE_DABBM,
]

# Baseline solver id
SOLVER_NEWTON = "newton"

# Solver config keys
CONF_RULE = "rule"
CONF_BETA_MIN = "beta_min"
CONF_BETA_MAX = "beta_max"
CONF_RHO = "rho"
CONF_SIGMA = "sigma"
CONF_ETA_RATIO = "eta_ratio"
CONF_ETA_OFFSET = "eta_offset"
CONF_MAX_ITERS = "max_iters"
CONF_MAX_FEVALS = "max_fevals"
CONF_MAX_BACKTRACKS = "max_backtracks"
CONF_STAGNATION_WINDOW = "stagnation_window"
CONF_TOL = "tol"
CONF_BETA0 = "beta0"

# Trust-region config keys
CONF_INITIAL_RADIUS = "initial_radius"
CONF_MAX_RADIUS = "max_radius"
CONF_SHRINK_THRESHOLD = "shrink_threshold"
CONF_EXPAND_THRESHOLD = "expand_threshold"
CONF_SHRINK_FACTOR = "shrink_factor"
CONF_EXPAND_FACTOR = "expand_factor"
CONF_ACCEPT_RATIO = "accept_ratio"
CONF_FD_STEP = "fd_step"

# SRAND defaults
DEFAULT_BETA_MIN = 1e-10
DEFAULT_BETA_MAX = 1e10
DEFAULT_RHO = 1e-4
DEFAULT_SIGMA = 0.5
DEFAULT_ETA_RATIO = 0.99
DEFAULT_ETA_OFFSET = 100.0
DEFAULT_MAX_ITERS = 100_000
DEFAULT_MAX_FEVALS = 100_000
DEFAULT_MAX_BACKTRACKS = 40
DEFAULT_STAGNATION_WINDOW = 50
DEFAULT_TOL = 1e-6
DEFAULT_BETA0 = 1.0

# Trust-region defaults
DEFAULT_INITIAL_RADIUS = 1.0
DEFAULT_MAX_RADIUS = 1e10
DEFAULT_SHRINK_THRESHOLD = 0.25
DEFAULT_EXPAND_THRESHOLD = 0.75
DEFAULT_SHRINK_FACTOR = 0.25
DEFAULT_EXPAND_FACTOR = 2.0
DEFAULT_ACCEPT_RATIO = 1e-4
DEFAULT_TR_MAX_ITERS = 1000

# Contact regimes
REGIME_ADHESION = "adhesion-heavy"
REGIME_MIXED = "mixed"
REGIME_SLIP = "slip-heavy"
REGIMES = [REGIME_ADHESION, REGIME_MIXED, REGIME_SLIP]

# Spectral verification
DEFAULT_QUADRATURE_NODES = 8
SUITE_ALL = "lemmas"
SUITE_LEMMA1 = "lemma1"
SUITE_LEMMA2 = "lemma2"
SUITE_LEMMA3 = "lemma3"
SUITE_THEOREM1 = "theorem1"
VERIFY_SUITES = [SUITE_ALL, SUITE_LEMMA1, SUITE_LEMMA2, SUITE_LEMMA3, SUITE_THEOREM1]
DEFAULT_INSTANCES = 1000

# Report formats
FORMAT_CSV = "csv"
FORMAT_SVG = "svg"
FORMAT_TEXT = "text"
REPORT_FORMATS = [FORMAT_CSV, FORMAT_SVG, FORMAT_TEXT]
