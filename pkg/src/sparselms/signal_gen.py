"""Seeded generators for the identification experiment's stochastic inputs.

Everything here is a deterministic function of its parameters and an
:class:`RngStream`; a run's whole realization (sparse system, AR(1) input,
observation noise) is replayed bit-exactly by rebuilding the stream from
``(seed, stream_id)``.
"""

import numpy as np
from scipy.signal import lfilter

from .errors import ParameterError

__all__ = [
    "RngStream",
    "gen_sparse_system",
    "gen_ar1_input",
    "gen_gaussian_noise",
    "regressor_at",
]


class RngStream:
    """One reproducible random stream, typically one per Monte-Carlo run.

    Streams with the same ``(seed, stream_id)`` replay the identical sample
    sequence; distinct ``stream_id`` values give statistically independent
    sequences (PCG64 seeded via ``SeedSequence`` spawn keys).
    """

    def __init__(self, seed, stream_id=0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if stream_id < 0:
            raise ParameterError(f"stream_id must be >= 0, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        self.generator = np.random.default_rng(ss)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _gen(rng):
    # Accept an RngStream or a bare numpy Generator.
    return getattr(rng, "generator", rng)


def gen_sparse_system(n_taps, n_nonzero, rng):
    """Random sparse impulse response: ``n_nonzero`` taps at +/-1, rest 0.

    Positions are drawn uniformly without replacement; each nonzero value is
    +1 or -1 with probability 1/2.
    """
    if n_taps < 1:
        raise ParameterError(f"n_taps must be >= 1, got {n_taps}")
    if not 1 <= n_nonzero <= n_taps:
        raise ParameterError(
            f"n_nonzero must satisfy 1 <= n_nonzero <= n_taps={n_taps}, got {n_nonzero}"
        )
    g = _gen(rng)
    w = np.zeros(n_taps)
    pos = g.choice(n_taps, size=n_nonzero, replace=False)
    signs = g.integers(0, 2, size=n_nonzero) * 2 - 1
    w[pos] = signs
    return w


def gen_ar1_input(length, coeff, drive_variance, rng):
    """First-order autoregressive input, rescaled to unit sample variance.

    Generates ``x[0] = u[0]``, ``x[k] = coeff*x[k-1] + u[k]`` with white
    Gaussian drive of the given variance, then divides the realization by
    its sample standard deviation (denominator ``length``; the sample mean
    is left in place).  The post-scaling sample variance is exactly 1.
    """
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    if not abs(coeff) < 1:
        raise ParameterError(
            f"coeff must satisfy |coeff| < 1 (process is non-stationary otherwise), got {coeff}"
        )
    if not drive_variance > 0:
        raise ParameterError(f"drive_variance must be > 0, got {drive_variance}")
    g = _gen(rng)
    u = g.standard_normal(length) * np.sqrt(drive_variance)
    x = lfilter([1.0], [1.0, -coeff], u)
    v = np.var(x)
    if v == 0.0:
        raise ParameterError("cannot rescale a zero-variance realization to unit variance")
    return x / np.sqrt(v)


def gen_gaussian_noise(length, variance, rng):
    """I.i.d. zero-mean Gaussian samples of the given variance."""
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    if not variance >= 0:
        raise ParameterError(f"variance must be >= 0, got {variance}")
    g = _gen(rng)
    return g.standard_normal(length) * np.sqrt(variance)


def regressor_at(x, k, n_taps):
    """Regressor window ``[x[k], x[k-1], ..., x[k-n_taps+1]]``, zero prehistory.

    Indices before the start of the signal contribute 0.
    """
    x = np.asarray(x, dtype=float)
    if n_taps < 1:
        raise ParameterError(f"n_taps must be >= 1, got {n_taps}")
    if not 0 <= k < x.shape[0]:
        raise IndexError(f"index {k} out of bounds for signal of length {x.shape[0]}")
    out = np.zeros(n_taps)
    lo = max(k - n_taps + 1, 0)
    window = x[lo : k + 1][::-1]
    out[: window.shape[0]] = window
    return out
