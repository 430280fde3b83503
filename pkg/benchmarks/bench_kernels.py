"""Times the jitted kernels against the pure-numpy fallback.

Run from the repo root (requires numba importable):

    python3 benchmarks/bench_kernels.py [--n 20000] [--m 100] [--c 50] [--repeats 5]
"""

import argparse
import time

import numpy as np

from xferscore import _kernels


def _timeit(fn, args, repeats):
    fn(*args)  # warmup (and JIT compile for the numba variants)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--m", type=int, default=100)
    parser.add_argument("--c", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba backend not loaded; unset XFERSCORE_BACKEND and retry")

    rng = np.random.default_rng(0)
    pred = rng.random((args.n, args.m)) + 1e-3
    pred /= pred.sum(axis=1, keepdims=True)
    labels = rng.integers(0, args.c, size=args.n)
    cond = rng.random((args.c, args.m))
    feats = rng.standard_normal((args.n, 16))
    orders = np.stack([rng.permutation(args.n) for _ in range(3)]).astype(np.int64)

    rows = [
        ("class_sorted_sums",
         _kernels.class_sorted_sums_numba, _kernels.class_sorted_sums_numpy,
         (pred, labels, args.c)),
        ("inner_sums",
         _kernels.inner_sums_numba, _kernels.inner_sums_numpy,
         (pred, cond, labels)),
        ("sgd_train (3 epochs)",
         _kernels.sgd_train_numba, _kernels.sgd_train_numpy,
         (feats, labels, args.c, orders, 0.05, 64, 0.0)),
    ]

    print(f"n={args.n} m={args.m} c={args.c}  (best of {args.repeats})")
    print(f"{'kernel':<22} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, fast, ref, call_args in rows:
        t_fast = _timeit(fast, call_args, args.repeats)
        t_ref = _timeit(ref, call_args, args.repeats)
        print(f"{name:<22} {t_fast * 1e3:>8.2f}ms {t_ref * 1e3:>8.2f}ms {t_ref / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
