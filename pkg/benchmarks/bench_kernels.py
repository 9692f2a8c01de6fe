"""Timing comparison of the numba and numpy kernel backends.

Runs each hot kernel on representative workloads and prints per-call
timings for both implementations.  The numba path is warmed up first so
JIT compilation does not pollute the numbers.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from tailfactor import _kernels


def _time(fn, *args, repeats=20):
    fn(*args)  # warm-up (JIT compile on the numba path)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    pairs = []

    xs = rng.uniform(0, 1, size=(300, 2))
    ys = rng.uniform(0, 1, size=(300, 2))
    pairs.append(
        ("l1_cost_matrix 300x300", (xs, ys, 1.0), _kernels._l1_cost_matrix_np)
    )

    pts = rng.uniform(0, 1, size=(50_000, 2))
    centers = rng.uniform(0, 1, size=(4, 2))
    pairs.append(("assign_points 50k x 4", (pts, centers), _kernels._assign_points_np))

    labels, _ = _kernels._assign_points_np(pts, centers)
    pairs.append(("center_update 50k x 4", (pts, labels, 4), _kernels._center_update_np))

    fast = {
        "l1_cost_matrix 300x300": _kernels.l1_cost_matrix,
        "assign_points 50k x 4": _kernels.assign_points,
        "center_update 50k x 4": _kernels.center_update,
    }

    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'kernel':<26}{'numpy (ms)':>12}{'active (ms)':>13}{'speedup':>9}")
    for name, args, np_fn in pairs:
        t_np = _time(np_fn, *args) * 1e3
        t_fast = _time(fast[name], *args) * 1e3
        print(f"{name:<26}{t_np:>12.3f}{t_fast:>13.3f}{t_np / t_fast:>9.2f}x")


if __name__ == "__main__":
    main()
