"""Monte-Carlo harness for sparse-system identification.

Runs (variant x sparsity) cells: each run draws a fresh sparse system,
AR(1) input, and observation noise from its own seeded stream, filters for
a fixed number of iterations, and records the squared weight deviation
``sum((w_true - w_est)**2)`` after every update.  Curves are these traces
averaged pointwise over runs.

Reproducibility contract: a cell's output is a pure function of
(ExperimentConfig, variant, sparsity level).  Runs use per-run RNG streams
and are reduced in run-index order, so results are bit-identical for any
worker count, and all variants see identical realizations at a given run
index (paired comparisons).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DimensionMismatchError, DivergenceError, ParameterError
from .filter_core import AlgorithmConfig, LeakSign, Variant
from .signal_gen import RngStream, gen_ar1_input, gen_gaussian_noise, gen_sparse_system

__all__ = [
    "ExperimentConfig",
    "MsdCurve",
    "SteadyStateSummary",
    "default_schedule",
    "msd",
    "run_trial",
    "run_cell",
    "run_experiment",
    "steady_state",
]

# A single trace sample above this aborts the cell: the step-level finite
# check catches overflow, this catches runaway-but-finite instability.
_TRACE_ABORT = 1e6

# Shrinkage weight per nonzero-tap count, and leakage factor per count.
_RHO_PL = {1: 0.003, 4: 0.002, 8: 0.0015, 16: 0.0001}
_GAMMA = {1: 0.005, 4: 0.005, 8: 0.005, 16: 0.0005}


def default_schedule():
    """Hyperparameters for every (variant, nonzero-count) cell of the default study.

    mu=0.015 throughout; p=0.5 and epsilon_pl=10 for the shrinkage variants;
    rho_pl and gamma vary with the nonzero-tap count (lighter shrinkage and
    leakage as the system becomes denser).
    """
    sched = {}
    for level in (1, 4, 8, 16):
        rho, gam = _RHO_PL[level], _GAMMA[level]
        sched[(Variant.LMS, level)] = AlgorithmConfig(Variant.LMS, mu=0.015)
        sched[(Variant.LLMS, level)] = AlgorithmConfig(Variant.LLMS, mu=0.015, gamma=gam)
        sched[(Variant.LP_LIKE_LMS, level)] = AlgorithmConfig(
            Variant.LP_LIKE_LMS, mu=0.015, rho_pl=rho, epsilon_pl=10.0, p=0.5
        )
        sched[(Variant.LP_LIKE_LLMS, level)] = AlgorithmConfig(
            Variant.LP_LIKE_LLMS, mu=0.015, gamma=gam, rho_pl=rho, epsilon_pl=10.0, p=0.5
        )
    return sched


@dataclass
class ExperimentConfig:
    """Full study description: protocol constants plus the parameter schedule.

    ``schedule`` maps ``(Variant, nonzero-count)`` to an
    :class:`~sparselms.filter_core.AlgorithmConfig`; ``None`` means
    :func:`default_schedule`.
    """

    n_taps: int = 16
    sparsity_levels: tuple = (1, 4, 8, 16)
    iterations: int = 8000
    runs: int = 200
    ar_coeff: float = 0.8
    drive_variance: float = 1e-3
    noise_variance: float = 1e-2
    master_seed: int = 1234
    schedule: dict = None
    steady_state_window: int = 500

    def __post_init__(self):
        if self.schedule is None:
            self.schedule = default_schedule()
        self.sparsity_levels = tuple(int(s) for s in self.sparsity_levels)
        if self.n_taps < 1:
            raise ParameterError(f"n_taps must be >= 1, got {self.n_taps}")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if self.runs < 1:
            raise ParameterError(f"runs must be >= 1, got {self.runs}")
        if not 1 <= self.steady_state_window <= self.iterations:
            raise ParameterError(
                "steady_state_window must satisfy 1 <= window <= iterations="
                f"{self.iterations}, got {self.steady_state_window}"
            )
        for s in self.sparsity_levels:
            if not 1 <= s <= self.n_taps:
                raise ParameterError(
                    f"sparsity level must satisfy 1 <= level <= n_taps={self.n_taps}, got {s}"
                )
        if not abs(self.ar_coeff) < 1:
            raise ParameterError(f"ar_coeff must satisfy |ar_coeff| < 1, got {self.ar_coeff}")
        if not self.drive_variance > 0:
            raise ParameterError(f"drive_variance must be > 0, got {self.drive_variance}")
        if not self.noise_variance >= 0:
            raise ParameterError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ParameterError(
                f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}"
            )


@dataclass
class MsdCurve:
    """Per-iteration mean squared deviation for one (variant, sparsity) cell.

    ``run_tails`` holds each run's trailing trace window (runs x window) so
    that :func:`steady_state` can report a standard error across runs.
    """

    variant: Variant
    sparsity_level: int
    n_taps: int
    values: np.ndarray
    runs: int
    run_tails: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.shape[0] < 1:
            raise ParameterError("values must be a nonempty 1-d array")
        if not np.isfinite(self.values).all() or (self.values < 0).any():
            raise ParameterError("MSD values must be finite and nonnegative")


@dataclass(frozen=True)
class SteadyStateSummary:
    """Trailing-window MSD mean and its standard error across runs."""

    variant: Variant
    sparsity_level: int
    mean: float
    stderr: float


def msd(true_w, est_w):
    """Squared deviation ``sum((true_w - est_w)**2)`` between weight vectors."""
    true_w = np.asarray(true_w, dtype=float)
    est_w = np.asarray(est_w, dtype=float)
    if true_w.shape != est_w.shape:
        raise DimensionMismatchError(
            f"weight vectors differ in length: {true_w.shape[0]} vs {est_w.shape[0]}"
        )
    d = true_w - est_w
    return float(np.dot(d, d))


def _leak_mult(cfg):
    if cfg.variant is Variant.LLMS:
        return 1.0 - cfg.mu * cfg.gamma
    if cfg.variant is Variant.LP_LIKE_LLMS:
        if cfg.leak_sign is LeakSign.PLUS:
            return 1.0 + cfg.mu * cfg.gamma
        return 1.0 - cfg.mu * cfg.gamma
    return 1.0


def run_trial(system, x, noise, cfg, iterations, backend=None):
    """One full adaptation from zero weights; returns the deviation trace.

    At iteration k the desired sample is ``system . x_k + noise[k]`` with a
    zero-prehistory regressor; ``trace[k]`` is the squared deviation after
    the k-th update.

    Raises
    ------
    DivergenceError
        If the weights go non-finite, with the offending iteration index.
    """
    system = np.ascontiguousarray(system, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    noise = np.ascontiguousarray(noise, dtype=float)
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    if x.shape[0] < iterations or noise.shape[0] < iterations:
        raise DimensionMismatchError(
            f"input and noise must provide at least {iterations} samples, "
            f"got {x.shape[0]} and {noise.shape[0]}"
        )
    n_taps = system.shape[0]
    xpad = np.concatenate([np.zeros(n_taps - 1), x[:iterations]])
    trace = np.empty(iterations)
    loop = _kernels.get_trial_loop(backend)
    bad = loop(
        system,
        xpad,
        noise,
        iterations,
        _kernels.VARIANT_CODES[cfg.variant.value],
        cfg.mu,
        _leak_mult(cfg),
        cfg.rho_pl,
        cfg.epsilon_pl,
        cfg.p,
        trace,
    )
    if bad >= 0:
        raise DivergenceError(
            f"weights became non-finite at iteration {bad}", iteration=int(bad)
        )
    return trace


def run_cell(variant, sparsity_level, config, workers=None, backend=None):
    """Average one (variant, sparsity) cell over ``config.runs`` runs.

    Run r's realizations come from ``RngStream(master_seed, r)`` and depend
    only on r, so every variant's cell sees the same systems, inputs, and
    noise.  Traces are summed in run-index order whatever ``workers`` is.
    """
    key = (variant, sparsity_level)
    if key not in config.schedule:
        raise ConfigError(
            f"schedule has no entry for ({variant.value}, {sparsity_level}/{config.n_taps})"
        )
    cfg = config.schedule[key]
    n = config.iterations
    length = n + config.n_taps
    tail_w = min(config.steady_state_window, n)

    def one_run(r):
        stream = RngStream(config.master_seed, r)
        system = gen_sparse_system(config.n_taps, sparsity_level, stream)
        x = gen_ar1_input(length, config.ar_coeff, config.drive_variance, stream)
        noise = gen_gaussian_noise(length, config.noise_variance, stream)
        try:
            trace = run_trial(system, x, noise, cfg, n, backend=backend)
        except DivergenceError as err:
            raise DivergenceError(
                f"{err} (run {r})", iteration=err.iteration, run=r
            ) from None
        if trace.max() > _TRACE_ABORT:
            k = int(np.argmax(trace > _TRACE_ABORT))
            raise DivergenceError(
                f"squared deviation exceeded {_TRACE_ABORT:g} at iteration {k} (run {r})",
                iteration=k,
                run=r,
            )
        return trace

    acc = np.zeros(n)
    tails = np.empty((config.runs, tail_w))
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for r, trace in enumerate(pool.map(one_run, range(config.runs))):
                acc += trace
                tails[r] = trace[-tail_w:]
    else:
        for r in range(config.runs):
            trace = one_run(r)
            acc += trace
            tails[r] = trace[-tail_w:]
    return MsdCurve(variant, sparsity_level, config.n_taps, acc / config.runs, config.runs, tails)


def run_experiment(config, variants=None, levels=None, workers=None, backend=None):
    """Run all requested cells; defaults to every variant at every level."""
    if variants is None:
        variants = list(Variant)
    if levels is None:
        levels = list(config.sparsity_levels)
    return [
        run_cell(v, s, config, workers=workers, backend=backend)
        for v in variants
        for s in levels
    ]


def steady_state(curve, window):
    """Mean of the trailing ``window`` curve values, with across-run stderr.

    The standard error is computed from per-run trailing means when the
    curve carries them (and 0.0 otherwise, e.g. for hand-built curves).
    """
    n = curve.values.shape[0]
    if not 1 <= window <= n:
        raise ParameterError(f"window must satisfy 1 <= window <= {n}, got {window}")
    mean = float(curve.values[-window:].mean())
    stderr = 0.0
    tails = curve.run_tails
    if tails is not None and curve.runs > 1 and tails.shape[1] >= window:
        per_run = tails[:, -window:].mean(axis=1)
        stderr = float(per_run.std(ddof=1) / np.sqrt(curve.runs))
    return SteadyStateSummary(curve.variant, curve.sparsity_level, mean, stderr)
