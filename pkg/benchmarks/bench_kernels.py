"""Compare the numba kernels against the pure-numpy fallback.

Times spmm and col_sq_mass on synthetic graphs of a few sizes and checks
that both backends agree bit for bit.  Run from the repo root:

    python3 benchmarks/bench_kernels.py [--sizes 1000,5000,20000] [--reps 7]
"""

import argparse
import statistics
import time

import numpy as np

from deepgnn.graph import CsrGraph
from deepgnn.kernels import _numpy
from deepgnn.rng import Rng

try:
    from deepgnn.kernels import _numba
except ImportError:
    _numba = None


def random_graph(n, avg_degree, seed):
    rng = Rng(seed)
    m = n * avg_degree // 2
    raw = rng.raw(2 * m)
    src = (raw[:m] % n).astype(np.int64)
    dst = (raw[m:] % n).astype(np.int64)
    keep = src != dst
    return CsrGraph.from_edges(n, src[keep], dst[keep], undirected=True)


def timeit(fn, reps):
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(samples)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,5000,20000")
    ap.add_argument("--avg-degree", type=int, default=8)
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--reps", type=int, default=7)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _numba is None:
        print("numba unavailable; timing the numpy fallback only")

    header = f"{'n':>8} {'nnz':>10} {'kernel':<12} {'numpy ms':>10}"
    if _numba is not None:
        header += f" {'numba ms':>10} {'speedup':>8}"
    print(header)
    for n in sizes:
        g = random_graph(n, args.avg_degree, seed=3)
        r = g.normalized()
        x = Rng(4).normal(n * args.width).reshape(n, args.width)
        mask = Rng(5).bernoulli_keep(0.7, n)

        for name, np_fn, nb_fn, check in (
            ("spmm",
             lambda: _numpy.spmm(r.row_ptr, r.col_idx, r.values, x),
             (lambda: _numba.spmm(r.row_ptr, r.col_idx, r.values, x)) if _numba else None,
             True),
            ("col_sq_mass",
             lambda: _numpy.col_sq_mass(r.row_ptr, r.col_idx, r.values, mask),
             (lambda: _numba.col_sq_mass(r.row_ptr, r.col_idx, r.values, mask)) if _numba else None,
             True),
        ):
            if nb_fn is not None:
                nb_fn()  # compile outside the timed region
                if check and not np.array_equal(np_fn(), nb_fn()):
                    raise AssertionError(f"{name}: backends disagree on n={n}")
            np_ms = timeit(np_fn, args.reps)
            line = f"{n:>8} {r.col_idx.size:>10} {name:<12} {np_ms:>10.3f}"
            if nb_fn is not None:
                nb_ms = timeit(nb_fn, args.reps)
                line += f" {nb_ms:>10.3f} {np_ms / nb_ms:>7.1f}x"
            print(line)


if __name__ == "__main__":
    main()
