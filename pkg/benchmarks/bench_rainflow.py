#!/usr/bin/env python3
"""Benchmark the compiled rainflow kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_rainflow.py [--repeats N]
"""

import argparse
import time

import numpy as np

from dbio import _rainflow_py

try:
    from dbio import _rainflow_cy
except ImportError:
    _rainflow_cy = None

LENGTHS = (1_000, 10_000, 100_000, 1_000_000)


def make_trace(n, rng):
    return np.clip(np.cumsum(rng.normal(0.0, 0.05, n)) + 0.5, 0.0, 1.0)


def bench(fn, trace, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(trace)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(2024)
    print(f"{'length':>10} {'python (s)':>12} {'cython (s)':>12} {'speedup':>9}")
    for n in LENGTHS:
        trace = make_trace(n, rng)
        t_py = bench(_rainflow_py.extract_cycles, trace, args.repeats)
        if _rainflow_cy is not None:
            r_py, w_py = _rainflow_py.extract_cycles(trace)
            r_cy, w_cy = _rainflow_cy.extract_cycles(trace)
            assert np.array_equal(r_py, r_cy) and np.array_equal(w_py, w_cy), \
                "kernel outputs diverged"
            t_cy = bench(_rainflow_cy.extract_cycles, trace, args.repeats)
            print(f"{n:>10} {t_py:>12.4f} {t_cy:>12.4f} {t_py / t_cy:>8.1f}x")
        else:
            print(f"{n:>10} {t_py:>12.4f} {'n/a':>12} {'n/a':>9}")
    if _rainflow_cy is None:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
