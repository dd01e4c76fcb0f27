"""Compare the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per kernel and backend, plus the max difference
between the two outputs (relative to max(1, |value|)).  The numba timings exclude the first (compiling) call.
"""
import argparse
import time

import numpy as np

from kalpha import _accel


def best_of(fn, args, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.nanmax(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def cases(rng):
    n = 200_000
    parts = tuple(rng.normal(size=(n, 3)) for _ in range(5))
    yield "shape_from_partials", parts + (1e-9,), _accel.shape_from_partials_numpy, _accel.shape_from_partials_numba
    pts = rng.normal(size=(2000, 2))
    poly = np.cumsum(rng.normal(size=(2000, 2)), axis=0)
    yield "polyline_distance", (pts, poly), _accel.polyline_distance_numpy, _accel.polyline_distance_numba
    sigma = np.cumsum(rng.uniform(0.5, 1.5, 100_000))
    yield "curve_stencils", (sigma,), _accel.curve_stencils_numpy, _accel.curve_stencils_numba


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':22s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'rel diff':>10s}")
    for name, a, f_np, f_nb in cases(rng):
        f_nb(*a)  # compile
        t_np, o_np = best_of(f_np, a, args.repeat)
        t_nb, o_nb = best_of(f_nb, a, args.repeat)
        print(f"{name:22s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f} {_maxdiff(o_np, o_nb):10.2e}")


if __name__ == "__main__":
    main()
