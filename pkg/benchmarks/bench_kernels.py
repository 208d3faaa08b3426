"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage:  python benchmarks/bench_kernels.py [--quick]

Workloads mirror the hot paths of the analysis pipeline: lasso coordinate
descent at probe-sized problems and the Kendall permutation loop at the
18-term RSM size.
"""

import argparse
import time

import numpy as np

from chromalign._kernels import available_backends, get_backend


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_lasso(backend, n, d, alpha, repeats):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, d))
    X = np.asfortranarray((X - X.mean(0)) / X.std(0))
    w_true = np.zeros(d)
    w_true[rng.choice(d, size=max(3, d // 20), replace=False)] = rng.normal(
        size=max(3, d // 20)) * 5.0
    y = X @ w_true + rng.normal(size=n)
    y -= y.mean()
    return time_call(lambda: backend.lasso_cd(X, y, alpha, 1e-8, 10_000), repeats)


def bench_perm(backend, n_terms, n_perm, repeats):
    rng = np.random.default_rng(1)
    m = rng.uniform(size=(n_terms, n_terms))
    m = (m + m.T) / 2
    np.fill_diagonal(m, 1.5)
    iu = np.triu_indices(n_terms, 1)
    a = rng.uniform(size=iu[0].size)
    sign_a = np.sign(a[:, None] - a[None, :]).astype(np.int8)
    perms = np.argsort(rng.random((n_perm, n_terms)), axis=1)
    return time_call(
        lambda: backend.perm_concordance(m, perms, iu[0], iu[1], sign_a), repeats)


def bench_kendall(backend, size, repeats):
    rng = np.random.default_rng(2)
    x = rng.uniform(size=size)
    y = rng.uniform(size=size)
    return time_call(lambda: [backend.kendall_stats(x, y) for _ in range(100)],
                     repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    n_perm = 2_000 if args.quick else 10_000
    lasso_shapes = [(330, 64, 1.0), (330, 256, 10.0)]
    if not args.quick:
        lasso_shapes.append((330, 1024, 50.0))

    backends = {name: get_backend(name) for name in available_backends()}
    if "native" not in backends:
        print("note: compiled kernels unavailable; timing the fallback only")

    rows = []
    for n, d, alpha in lasso_shapes:
        timings = {name: bench_lasso(be, n, d, alpha, repeats=2)
                   for name, be in backends.items()}
        rows.append((f"lasso_cd {n}x{d} alpha={alpha}", timings))
    timings = {name: bench_perm(be, 18, n_perm, repeats=2)
               for name, be in backends.items()}
    rows.append((f"perm_concordance 18x18 x{n_perm}", timings))
    timings = {name: bench_kendall(be, 153, repeats=2)
               for name, be in backends.items()}
    rows.append(("kendall_stats m=153 x100", timings))

    width = max(len(r[0]) for r in rows) + 2
    header = f"{'workload':<{width}}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        line = f"{name:<{width}}"
        for backend_name in backends:
            line += f"{timings[backend_name] * 1e3:>10.1f}ms"
        if len(backends) == 2:
            line += f"{timings['python'] / timings['native']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
