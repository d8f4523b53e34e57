#!/usr/bin/env python3
"""Time the JIT-compiled trial loop against the vectorized numpy fallback.

Runs one Monte-Carlo cell per backend on an identical workload, checks the
curves agree, and reports per-update cost plus the relative speedup.
"""

import argparse
import time

import numpy as np

from sparselms import ExperimentConfig, Variant, run_cell
from sparselms._kernels import available_backends


def time_backend(backend, config, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        run_cell(Variant.LP_LIKE_LLMS, 1, config, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=20, help="Monte-Carlo runs per cell")
    ap.add_argument("--iterations", type=int, default=8000, help="updates per run")
    ap.add_argument("--repeats", type=int, default=3, help="timing repeats (best kept)")
    args = ap.parse_args()

    config = ExperimentConfig(
        runs=args.runs,
        iterations=args.iterations,
        steady_state_window=min(500, args.iterations),
    )
    updates = args.runs * args.iterations
    print(
        f"workload: {args.runs} runs x {args.iterations} iterations, 16 taps, "
        f"lp_like_llms @ SR 1/16, best of {args.repeats}"
    )

    backends = available_backends()
    curves = {}
    results = {}
    for backend in backends:
        # first call also pays any JIT compilation, outside the timed region
        curves[backend] = run_cell(Variant.LP_LIKE_LLMS, 1, config, backend=backend)
        results[backend] = time_backend(backend, config, args.repeats)
        per = results[backend] / updates * 1e9
        print(f"{backend:>6}: {results[backend]:8.3f} s  ({per:8.1f} ns/update)")

    if len(backends) == 2:
        same = np.allclose(
            curves["numba"].values, curves["numpy"].values, rtol=1e-12, atol=0.0
        )
        print(f"curves agree (rtol 1e-12): {same}")
        print(f"speedup (numba over numpy): {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
