"""Hot inner loops for Monte-Carlo trials, in two interchangeable backends.

``trial_loop`` runs one full adaptive-filtering trial (all iterations of one
run) and writes the per-iteration squared weight deviation into a
caller-provided ``trace`` array.  The ``numba`` backend JIT-compiles the
scalar loop below; the ``numpy`` backend is a vectorized re-implementation
of the same arithmetic.  Both produce trajectories equal to ~1e-12 relative
tolerance (the only difference is dot-product summation order), and each
backend is bit-reproducible with itself.

Backend choice: the ``SPARSELMS_BACKEND`` environment variable ("numba" or
"numpy") wins; otherwise numba is used when importable, numpy otherwise.
"""

import os

import numpy as np

from .errors import ConfigError

__all__ = [
    "ENV_VAR",
    "LMS",
    "LLMS",
    "LP_LMS",
    "LP_LLMS",
    "VARIANT_CODES",
    "available_backends",
    "default_backend",
    "get_trial_loop",
]

ENV_VAR = "SPARSELMS_BACKEND"

# Integer variant codes shared by both backends (numba-friendly).
LMS = 0
LLMS = 1
LP_LMS = 2
LP_LLMS = 3

VARIANT_CODES = {"lms": LMS, "llms": LLMS, "lp_like_lms": LP_LMS, "lp_like_llms": LP_LLMS}


def _trial_loop(system, xpad, noise, n_iter, variant, mu, leak_mult, rho_pl, eps_pl, p, trace):
    """One trial, scalar form.

    ``xpad`` is the input signal prefixed with ``n_taps - 1`` zeros, so the
    regressor at iteration ``k`` is ``xpad[k + n_taps - 1]`` down to
    ``xpad[k]``.  ``noise`` is added to the true-system output to form the
    desired signal.  ``trace[k]`` receives ``sum((system - w)**2)`` measured
    after update ``k``.

    Returns the iteration index at which the weights first went non-finite,
    or -1 if the whole trial stayed finite.
    """
    n_taps = system.shape[0]
    w = np.zeros(n_taps)
    use_shrink = variant == LP_LMS or variant == LP_LLMS
    pm = 1.0 - p
    for k in range(n_iter):
        base = k + n_taps - 1
        y = 0.0
        d = noise[k]
        for i in range(n_taps):
            xi = xpad[base - i]
            y += w[i] * xi
            d += system[i] * xi
        e = d - y
        mu_e = mu * e
        dev = 0.0
        ok = True
        for i in range(n_taps):
            wi = w[i]
            nw = leak_mult * wi + mu_e * xpad[base - i]
            if use_shrink:
                if wi > 0.0:
                    nw -= rho_pl * (p / (eps_pl + wi ** pm))
                elif wi < 0.0:
                    nw += rho_pl * (p / (eps_pl + (-wi) ** pm))
            w[i] = nw
            diff = system[i] - nw
            dev += diff * diff
            if not np.isfinite(nw):
                ok = False
        trace[k] = dev
        if not ok:
            return k
    return -1


def _numpy_trial_loop(system, xpad, noise, n_iter, variant, mu, leak_mult, rho_pl, eps_pl, p, trace):
    """Vectorized twin of :func:`_trial_loop` (same contract)."""
    n_taps = system.shape[0]
    w = np.zeros(n_taps)
    use_shrink = variant == LP_LMS or variant == LP_LLMS
    pm = 1.0 - p
    # overflow here is divergence, which the finite check reports by value
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_iter):
            xk = xpad[k : k + n_taps][::-1]
            e = noise[k] + np.dot(system, xk) - np.dot(w, xk)
            new_w = leak_mult * w + (mu * e) * xk
            if use_shrink:
                g = rho_pl * (p / (eps_pl + np.abs(w) ** pm))
                new_w = new_w - np.sign(w) * g
            w = new_w
            diff = system - w
            trace[k] = np.dot(diff, diff)
            if not np.isfinite(w).all():
                return k
    return -1


try:
    from numba import njit as _njit

    _numba_trial_loop = _njit(cache=True, nogil=True)(_trial_loop)
except ImportError:  # pragma: no cover - exercised only without numba installed
    _numba_trial_loop = None


def available_backends():
    """Backends usable in this environment, preferred first."""
    if _numba_trial_loop is not None:
        return ("numba", "numpy")
    return ("numpy",)


def default_backend():
    """Resolve the backend: ``SPARSELMS_BACKEND`` if set, else best available."""
    env = os.environ.get(ENV_VAR)
    if env is not None:
        if env not in ("numba", "numpy"):
            raise ConfigError(
                f"{ENV_VAR} must be 'numba' or 'numpy', got {env!r}"
            )
        return env
    return available_backends()[0]


def get_trial_loop(backend=None):
    """Return the trial-loop callable for ``backend`` (default: resolved)."""
    if backend is None:
        backend = default_backend()
    if backend == "numpy":
        return _numpy_trial_loop
    if backend == "numba":
        if _numba_trial_loop is None:
            raise ConfigError("backend 'numba' requested but numba is not importable")
        return _numba_trial_loop
    raise ConfigError(f"unknown backend {backend!r}; expected 'numba' or 'numpy'")
