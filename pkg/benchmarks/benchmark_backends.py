#!/usr/bin/env python3
"""Time the compiled routing kernel against the pure-Python one.

Both kernels are run on the same trial-seed block and must produce
bit-identical delivery times — the comparison is aborted otherwise.
Usage: python benchmarks/benchmark_backends.py [--trials 500] [--n 8000] ...
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from swhops import _kernel_py
from swhops.experiments import trial_seed_block

try:
    from swhops import _kernel
except ImportError:
    _kernel = None


def run(mod, args, seeds):
    tau = np.empty(args.trials, dtype=np.float64)
    delivered = np.zeros(args.trials, dtype=np.uint8)
    viol = np.zeros(args.trials, dtype=np.uint8)
    best = float("inf")
    for _ in range(args.repeat):
        start = time.perf_counter()
        mod.run_trials(args.R, args.r, args.delta, args.n, args.d,
                       True, True, seeds, tau, delivered, viol)
        best = min(best, time.perf_counter() - start)
    if viol.any():
        raise SystemExit("routing invariant violated — results unusable")
    return best, tau.copy(), delivered.copy()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--R", type=float, default=20.0)
    parser.add_argument("--r", type=float, default=1.0)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--n", type=int, default=8000)
    parser.add_argument("--d", type=float, default=8.0)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    seeds = trial_seed_block(args.seed, args.trials)
    print(f"workload: n={args.n} d={args.d} R={args.R} trials={args.trials} "
          f"(best of {args.repeat})")

    py_time, py_tau, py_delivered = run(_kernel_py, args, seeds)
    rate = py_delivered.mean()
    print(f"pure-python backend: {py_time:8.3f} s   "
          f"({args.trials / py_time:8.1f} trials/s, delivery {rate:.3f})")

    if _kernel is None:
        print("compiled backend not built — skipping comparison")
        return 0

    c_time, c_tau, c_delivered = run(_kernel, args, seeds)
    print(f"compiled backend:    {c_time:8.3f} s   "
          f"({args.trials / c_time:8.1f} trials/s)")

    if not (np.array_equal(py_tau, c_tau)
            and np.array_equal(py_delivered, c_delivered)):
        raise SystemExit("backends disagree — bit-identity contract broken")
    print(f"outputs bit-identical across backends; speedup {py_time / c_time:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
