#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-NumPy fallback.

Times the four hot kernels on representative sizes and prints a table.
Usage: python benchmarks/backend_bench.py [--sizes small|full]
"""
import argparse
import time

import numpy as np

from hsseig import matgen
from hsseig.backend import load_kernels


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_secular(kn, k, seed=0):
    d, u = matgen.uniform_pole_system(k, seed=seed)
    return timeit(lambda: kn.secular_all(d, u, 1.0))


def bench_jacobi(kn, n, seed=0):
    rng = np.random.default_rng(seed)
    A0 = rng.standard_normal((n, n))
    A0 = np.ascontiguousarray(A0 + A0.T)
    target = n * np.finfo(float).eps * np.linalg.norm(A0, "fro")

    def run():
        A = A0.copy()
        V = np.eye(n)
        kn.jacobi_run(A, V, target, 50)

    return timeit(run, repeat=1)


def bench_onesided(kn, shape, seed=0):
    rng = np.random.default_rng(seed)
    M0 = rng.standard_normal(shape)

    def run():
        M = M0.copy()
        kn.onesided_orthogonalize(M, 50)

    return timeit(run, repeat=1)


def bench_tql2(kn, n=25, batch=200, seed=0):
    rng = np.random.default_rng(seed)
    mats = [
        (rng.standard_normal(n), rng.standard_normal(n - 1)) for _ in range(batch)
    ]

    def run():
        for a, b in mats:
            kn.tql2(a.copy(), b.copy(), np.eye(n), 30)

    return timeit(run)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", choices=("small", "full"), default="small")
    args = ap.parse_args()

    full = args.sizes == "full"
    cases = [
        ("secular k=1000", lambda kn: bench_secular(kn, 1000)),
        ("secular k=4000", lambda kn: bench_secular(kn, 4000)) if full else None,
        ("jacobi n=300", lambda kn: bench_jacobi(kn, 300)),
        ("jacobi n=800", lambda kn: bench_jacobi(kn, 800)) if full else None,
        ("onesided 600x400", lambda kn: bench_onesided(kn, (400, 600))),
        ("tql2 n=25 x200", bench_tql2),
    ]
    cases = [c for c in cases if c is not None]

    backends = {}
    for name in ("c", "python"):
        try:
            backends[name] = load_kernels(name)
        except ImportError:
            print(f"backend {name!r} unavailable, skipping")

    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for label, fn in cases:
        row = {b: fn(kn) for b, kn in backends.items()}
        cells = "".join(f"{row[b] * 1e3:>10.1f}ms" for b in backends)
        speed = ""
        if "c" in row and "python" in row:
            speed = f"{row['python'] / row['c']:>9.1f}x"
        print(f"{label:<20}{cells}{speed}")


if __name__ == "__main__":
    main()
