#!/usr/bin/env python3
"""Compare the compiled split-scan kernels against the pure-numpy fallback.

Times the raw kernels on presorted columns, then whole-model fits (DT, RF,
GBT) routed through each backend, and cross-checks that both backends
produce identical models. Run from the repo root:

    python3 benchmarks/kernel_bench.py [--rows 20000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from coverml import kernels
from coverml.models import (
    DecisionTreeParams,
    GbtParams,
    RandomForestParams,
    train_decision_tree,
    train_gbt,
    train_random_forest,
)


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(rows: int):
    rng = np.random.default_rng(0)
    cases = []
    for n in (1_000, 10_000, rows):
        x = np.sort(np.round(rng.random(n), 3))
        y01 = rng.integers(0, 2, size=n).astype(np.float64)
        resid = rng.normal(size=n)
        cases.append((n, x, y01, resid))

    print(f"{'kernel':<16}{'n':>9}{'python':>12}{'compiled':>12}{'speedup':>9}")
    for n, x, y01, resid in cases:
        for name, target in (("best_split_gini", y01), ("best_split_sse", resid)):
            times = {}
            for backend in kernels.available_backends():
                fn = getattr(kernels.get_backend(backend), name)
                times[backend] = time_call(lambda: fn(x, target), repeats=7)
            if "compiled" in times:
                ratio = times["python"] / times["compiled"]
                print(
                    f"{name:<16}{n:>9}{times['python'] * 1e6:>10.1f}us"
                    f"{times['compiled'] * 1e6:>10.1f}us{ratio:>8.1f}x"
                )
            else:
                print(f"{name:<16}{n:>9}{times['python'] * 1e6:>10.1f}us{'-':>12}{'-':>9}")


def bench_models(rows: int):
    rng = np.random.default_rng(1)
    X = np.round(rng.random((rows, 7)), 3)
    y = ((X[:, 0] > 0.6) | ((X[:, 1] > 0.5) & (X[:, 2] < 0.4))).astype(int)
    y ^= rng.random(rows) < 0.05

    fits = (
        ("decision tree", lambda: train_decision_tree(X, y, DecisionTreeParams(max_depth=5))),
        ("random forest (20 trees)", lambda: train_random_forest(X, y, RandomForestParams(num_trees=20))),
        ("gbt (10 rounds)", lambda: train_gbt(X, y, GbtParams(num_iterations=10))),
    )
    print(f"\n{'model fit':<26}{'python':>10}{'compiled':>10}{'speedup':>9}{'identical':>11}")
    for name, fit in fits:
        results = {}
        for backend in kernels.available_backends():
            with kernels.use_backend(backend):
                start = time.perf_counter()
                model = fit()
                results[backend] = (time.perf_counter() - start, model.to_dict())
        if "compiled" in results:
            t_py, d_py = results["python"]
            t_cy, d_cy = results["compiled"]
            same = "yes" if d_py == d_cy else "NO"
            print(f"{name:<26}{t_py:>9.3f}s{t_cy:>9.3f}s{t_py / t_cy:>8.1f}x{same:>11}")
        else:
            t_py, _ = results["python"]
            print(f"{name:<26}{t_py:>9.3f}s{'-':>10}{'-':>9}{'-':>11}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20_000)
    args = parser.parse_args()
    print(f"available backends: {', '.join(kernels.available_backends())}")
    print(f"active default: {kernels.backend_name()}\n")
    bench_kernels(args.rows)
    bench_models(args.rows)


if __name__ == "__main__":
    main()
