"""Numerical tolerances and protocol defaults used across the package."""

# SPD construction
SYMMETRY_RTOL = 1e-10
CONDITION_FLOOR = 1e-12

# Frechet mean fixed-point iteration
FRECHET_TOL = 1e-9
FRECHET_MAX_ITER = 50
FRECHET_MAX_HALVINGS = 30
# a step that at least halves the gradient norm is taken without trying shorter ones
FRECHET_CONTRACTION = 0.5

# Covariance estimation
DEFAULT_SHRINKAGE = 0.05
AUTO_SHRINKAGE_FLOOR = 1e-4
AUTO_SHRINKAGE_CEIL = 1.0 - 1e-6
FILTER_TRANSITION_HZ = 1.0

# Transfer evaluation grids
PROTOCOL_N_TRAIN = (5, 30, 55)
PROTOCOL_LAMBDAS = (0.0, 0.1, 0.3, 0.7)
PROTOCOL_REPETITIONS = 10
OPERATING_LAMBDA = 0.7
OPERATING_N_PER_CLASS = 2

# Pipeline names
PIPELINE_MDWM = "mdwm"
PIPELINE_TARGET_ONLY = "mdm-target-only"
PIPELINE_SOURCE_ONLY = "mdm-source-only"
DEFAULT_PIPELINES = (PIPELINE_MDWM, PIPELINE_TARGET_ONLY)

# Statistics
WILCOXON_EXACT_MAX_N = 25
ZERO_DIFFERENCE_ATOL = 1e-12
RANK_DECIMALS = 12
STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))

# Output formats
SCORE_COLUMNS = (
    "dataset",
    "subject",
    "pipeline",
    "n_train",
    "lambda",
    "repetition",
    "balanced_accuracy",
    "train_seconds",
    "test_seconds",
)
META_COLUMNS = ("dataset", "n_subjects", "smd", "p_value", "stars")
DATASET_FORMAT_VERSION = "1"
MODEL_FORMAT = "mdwm-model"
MODEL_FORMAT_VERSION = 1
