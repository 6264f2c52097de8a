#!/usr/bin/env python3
"""Benchmark the compiled SGD kernels against the numpy fallback.

Runs the dense (feature-vector) and sparse (hashed-text) epoch kernels on a
range of problem sizes and reports per-epoch wall time for each backend plus
the speedup. Also verifies that both backends produce numerically identical
updates before timing anything.

Usage:
    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np
from scipy import sparse as sp

from ontolabel.kernels import _pure

try:
    from ontolabel.kernels import _fast
except ImportError:
    _fast = None

BATCH = 64


def dense_problem(rng, n, d, c):
    X = np.hstack([rng.standard_normal((n, d)), np.ones((n, 1))])
    y = rng.integers(0, c, n).astype(np.int64)
    wts = rng.uniform(0.2, 1.0, n)
    W = 0.01 * rng.standard_normal((c, d + 1))
    V = np.abs(0.001 * rng.standard_normal((c, d + 1)))
    order = rng.permutation(n).astype(np.int64)
    lrs = np.full((n + BATCH - 1) // BATCH, 0.01)
    return lambda W, V, be: be.sgd_epoch_dense(
        W, V, X, y, wts, order, lrs, 1e-4, 0.9, 1e-8, BATCH), W, V


def sparse_problem(rng, n, d, c, density=0.01):
    M = sp.random(n, d, density=density, random_state=rng, format="csr")
    M = sp.hstack([M, np.ones((n, 1))], format="csr")
    data = M.data
    indices = M.indices.astype(np.int64)
    indptr = M.indptr.astype(np.int64)
    y = rng.integers(0, c, n).astype(np.int64)
    wts = rng.uniform(0.2, 1.0, n)
    W = 0.01 * rng.standard_normal((c, d + 1))
    V = np.abs(0.001 * rng.standard_normal((c, d + 1)))
    order = rng.permutation(n).astype(np.int64)
    lrs = np.full((n + BATCH - 1) // BATCH, 0.01)
    return lambda W, V, be: be.sgd_epoch_sparse(
        W, V, data, indices, indptr, M.shape[1], y, wts, order, lrs,
        0.0, 0.9, 1e-8, BATCH), W, V


def time_epoch(step, W, V, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        Wc, Vc = W.copy(), V.copy()
        t0 = time.perf_counter()
        step(Wc, Vc, backend)
        best = min(best, time.perf_counter() - t0)
    return best


def check_agreement(step, W, V):
    Wf, Vf = W.copy(), V.copy()
    Wp, Vp = W.copy(), V.copy()
    step(Wf, Vf, _fast)
    step(Wp, Vp, _pure)
    np.testing.assert_allclose(Wf, Wp, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(Vf, Vp, rtol=1e-9, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repeats per case; best time is reported")
    args = ap.parse_args()

    if _fast is None:
        raise SystemExit("compiled kernel is not built; nothing to compare")

    rng = np.random.default_rng(0)
    cases = []
    for n, d, c in [(1000, 64, 30), (5000, 64, 30), (5000, 256, 100), (20000, 64, 30)]:
        cases.append((f"dense  n={n:<6} d={d:<4} C={c}", dense_problem(rng, n, d, c)))
    # sparse widths reflect the column-compressed hashed-text view: only
    # buckets observed in training become weight columns
    for n, d, c in [(1000, 5000, 30), (5000, 20000, 30), (5000, 50000, 100)]:
        cases.append((f"sparse n={n:<6} d={d:<7} C={c}", sparse_problem(rng, n, d, c)))

    print(f"{'case':<32} {'pure (ms)':>10} {'fast (ms)':>10} {'speedup':>8}")
    for name, (step, W, V) in cases:
        check_agreement(step, W, V)
        t_pure = time_epoch(step, W, V, _pure, args.repeats)
        t_fast = time_epoch(step, W, V, _fast, args.repeats)
        print(f"{name:<32} {t_pure * 1e3:>10.2f} {t_fast * 1e3:>10.2f} "
              f"{t_pure / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
