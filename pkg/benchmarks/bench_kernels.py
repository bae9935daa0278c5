#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the NumPy fallback.

Times the closed-loop linear advance (the hot loop of certified decay runs
and refinement studies) and the single wave step used by the nonlinear
scheme.  Usage:

    python benchmarks/bench_kernels.py [--steps N] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from formstab._kernels import _ref

try:
    from formstab._kernels import _core
except ImportError:
    _core = None


def time_advance(impl, n_cells, n_steps, repeats):
    rng = np.random.default_rng(0)
    rp0 = rng.standard_normal(n_cells)
    rm0 = rng.standard_normal(n_cells)
    args = (1.0, 0.8, 0.8, 0.999, -0.001, -0.001, 0.999)
    best = math.inf
    for _ in range(repeats):
        rp, rm = rp0.copy(), rm0.copy()
        t0 = time.perf_counter()
        impl.advance_linear(rp, rm, *args, n_steps)
        best = min(best, time.perf_counter() - t0)
    return best


def time_wave(impl, n_cells, n_steps, repeats):
    rng = np.random.default_rng(1)
    v0 = rng.standard_normal(n_cells)
    s0 = rng.standard_normal(n_cells)
    best = math.inf
    for _ in range(repeats):
        v, s = v0.copy(), s0.copy()
        t0 = time.perf_counter()
        for _ in range(n_steps):
            impl.wave_step(v, s, 3.0, 0.95, 0.0, 1.5)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _core is None:
        print("compiled kernel not available; nothing to compare")
        return

    print(f"{'kernel':<16} {'cells':>6} {'steps':>6} {'numpy [ms]':>11} "
          f"{'compiled [ms]':>14} {'speedup':>8}")
    for bench, name in ((time_advance, "advance_linear"), (time_wave, "wave_step")):
        for n_cells in (64, 256, 1024, 4096):
            t_ref = bench(_ref, n_cells, args.steps, args.repeats)
            t_core = bench(_core, n_cells, args.steps, args.repeats)
            print(f"{name:<16} {n_cells:>6} {args.steps:>6} {t_ref * 1e3:>11.2f} "
                  f"{t_core * 1e3:>14.2f} {t_ref / t_core:>8.1f}x")

    # sanity: both backends produce identical fields
    rng = np.random.default_rng(2)
    rp, rm = rng.standard_normal(256), rng.standard_normal(256)
    a = (rp.copy(), rm.copy())
    b = (rp.copy(), rm.copy())
    _core.advance_linear(*a, 0.9, 0.5, 0.5, 1.0, -0.01, -0.01, 1.0, 1000)
    _ref.advance_linear(*b, 0.9, 0.5, 0.5, 1.0, -0.01, -0.01, 1.0, 1000)
    same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    print(f"\nbackends bit-identical after 1000 steps: {same}")


if __name__ == "__main__":
    main()
