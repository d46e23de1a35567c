"""Time the numba and numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py --n 100 --mesh 50 --repeat 3

Set PROCDCOV_DISABLE_NUMBA=1 to check the fallback on its own.
"""
import argparse
import time

import numpy as np

from procdcov import _accel
from procdcov._kernels import cross_exp_sums, pairwise_distances
from procdcov.core import make_equidistant_grid
from procdcov.gaussian_sim import ProcessModel, simulate_pair_sample
from procdcov.kernels import GAUSSIAN_KERNEL, field_from_values


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--mesh", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    grid = make_equidistant_grid(args.mesh)
    s = simulate_pair_sample(ProcessModel(rho=0.5), args.n, grid, seed=0)
    a = field_from_values(s.x_values, GAUSSIAN_KERNEL)
    b = field_from_values(s.y_values, GAUSSIAN_KERNEL)
    w = grid.weights

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA and _accel.numba_enabled() else [])
    results = {}
    print(f"n={args.n} G={len(grid)} workers={args.workers} repeat={args.repeat}")
    for name in backends:
        with _accel.use_backend(name):
            # warm-up triggers JIT compilation
            cross_exp_sums(a[:3, :3], b[:3, :3], w)
            pairwise_distances(s.x_values[:3])
            t_cross, f = best_of(lambda: cross_exp_sums(a, b, w, workers=args.workers), args.repeat)
            t_dist, d = best_of(lambda: pairwise_distances(s.x_values, workers=args.workers), args.repeat)
        results[name] = (f, d)
        print(f"{name:6s} cross_exp_sums {t_cross:8.3f}s   pairwise_distances {t_dist * 1e3:8.2f}ms")
    if len(results) == 2:
        (f0, d0), (f1, d1) = results.values()
        print(f"max rel difference: cross {np.max(np.abs(f0 - f1) / np.abs(f0)):.1e}, "
              f"distances {np.max(np.abs(d0 - d1)):.1e}")


if __name__ == "__main__":
    main()
