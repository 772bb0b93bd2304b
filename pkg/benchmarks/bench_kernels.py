"""Timing comparison of the compiled and pure-numpy likelihood kernels.

Run after installing the package:

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeats 5]

The subsampling samplers spend nearly all their time in per-datum
gather-and-evaluate kernels at small batch sizes, so that regime is what
matters; full-dataset sums are included for the setup phases.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tallmh._kernels import _ref

try:
    from tallmh._kernels import _fast
except ImportError:
    _fast = None


def make_inputs(n, seed=0):
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.standard_normal(n)
    X = np.ascontiguousarray(rng.standard_normal((n, 5)))
    t = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    th0 = rng.standard_normal(5) * 0.1
    th1 = th0 + 0.01
    g = rng.standard_normal(n)
    h = rng.standard_normal(n)
    return x, X, t, th0, th1, g, h


def bench(fn, repeats):
    times = timeit.repeat(fn, number=1, repeat=repeats)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    x, X, t, th0, th1, g, h = make_inputs(args.n)
    ga = np.array([0.0, 0.1])
    gb = np.array([0.05, 0.12])
    batches = [b for b in (10, 100, 1000, 10_000) if b <= args.n]
    rng = np.random.Generator(np.random.Philox(1))

    backends = [("numpy", _ref)]
    if _fast is not None:
        backends.append(("cython", _fast))
    else:
        print("compiled backend unavailable; timing numpy only")

    cases = []
    for b in batches:
        idx = np.ascontiguousarray(rng.integers(0, args.n, b))
        cases.append((
            "gauss_ratios[b=%d]" % b,
            lambda k, i=idx: k.gauss_ratios(x, i, ga, gb),
        ))
        cases.append((
            "logistic_corrected[b=%d]" % b,
            lambda k, i=idx: k.logistic_corrected_ratios(
                X, t, i, th0, th1, th0, g, h),
        ))
    cases.append(("gauss_loglik_sum[full]",
                  lambda k: k.gauss_loglik_sum(x, ga[0], ga[1])))
    cases.append(("logistic_loglik_sum[full]",
                  lambda k: k.logistic_loglik_sum(X, t, th0)))

    width = max(len(name) for name, _ in cases)
    header = "%-*s" % (width, "kernel")
    for name, _ in backends:
        header += "  %12s" % name
    if len(backends) == 2:
        header += "  %8s" % "speedup"
    print(header)
    for name, call in cases:
        row = "%-*s" % (width, name)
        times = []
        for _, mod in backends:
            best = bench(lambda: call(mod), args.repeats)
            times.append(best)
            row += "  %10.1f us" % (best * 1e6)
        if len(times) == 2:
            row += "  %7.2fx" % (times[0] / times[1])
        print(row)


if __name__ == "__main__":
    main()
