"""Sparsity-aware LMS adaptive filters and a reproducible Monte-Carlo harness.

The library implements four stochastic-gradient update rules (plain LMS,
leaky LMS, and their shrinkage-constrained counterparts) plus everything
needed to reproduce a sparse-system-identification study: seeded signal
generators, a trial/cell runner with bit-exact parallelism, and CSV/SVG
emitters behind the ``sparselms`` command.
"""

from .errors import (
    ConfigError,
    DimensionMismatchError,
    DivergenceError,
    ParameterError,
)
from .filter_core import (
    AlgorithmConfig,
    FilterState,
    LeakSign,
    Variant,
    instantaneous_error,
    llms_step,
    lms_step,
    lp_like_llms_step,
    lp_like_lms_step,
    pnorm_like,
    pnorm_like_gradient_term,
    predict,
    step,
)
from .signal_gen import (
    RngStream,
    gen_ar1_input,
    gen_gaussian_noise,
    gen_sparse_system,
    regressor_at,
)
from .experiment import (
    ExperimentConfig,
    MsdCurve,
    SteadyStateSummary,
    default_schedule,
    msd,
    run_cell,
    run_experiment,
    run_trial,
    steady_state,
)
from .cli import emit_csv, emit_plot, parse_config
from ._kernels import available_backends, default_backend

__version__ = "0.1.0"

__all__ = [
    "AlgorithmConfig",
    "ConfigError",
    "DimensionMismatchError",
    "DivergenceError",
    "ExperimentConfig",
    "FilterState",
    "LeakSign",
    "MsdCurve",
    "ParameterError",
    "RngStream",
    "SteadyStateSummary",
    "Variant",
    "available_backends",
    "default_backend",
    "default_schedule",
    "emit_csv",
    "emit_plot",
    "gen_ar1_input",
    "gen_gaussian_noise",
    "gen_sparse_system",
    "instantaneous_error",
    "llms_step",
    "lms_step",
    "lp_like_llms_step",
    "lp_like_lms_step",
    "msd",
    "parse_config",
    "pnorm_like",
    "pnorm_like_gradient_term",
    "predict",
    "regressor_at",
    "run_cell",
    "run_experiment",
    "run_trial",
    "steady_state",
    "step",
]
