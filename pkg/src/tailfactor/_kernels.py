"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set the environment variable ``TAILFACTOR_NO_NUMBA=1`` to force the numpy
fallback (also used automatically when numba is not importable).  Both
backends implement the same contracts; labels and masks are bit-identical,
floating-point reductions may differ in the last ulp.
"""

import os

import numpy as np

_DISABLE = os.environ.get("TAILFACTOR_NO_NUMBA", "").strip() in {"1", "true", "yes"}

if not _DISABLE:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover
        HAS_NUMBA = False
else:
    HAS_NUMBA = False


def _l1_cost_matrix_np(xs, ys, p):
    diff = np.abs(xs[:, None, :] - ys[None, :, :]).sum(axis=2)
    if p != 1.0:
        diff = diff**p
    return diff


def _assign_points_np(points, centers):
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels.astype(np.int64), inertia


def _center_update_np(points, labels, k):
    d = points.shape[1]
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    np.add.at(sums, labels, points)
    np.add.at(counts, labels, 1)
    return sums, counts


if HAS_NUMBA:

    @njit(cache=True)
    def _l1_cost_matrix_nb(xs, ys, p):
        nx, d = xs.shape
        ny = ys.shape[0]
        out = np.empty((nx, ny))
        for i in range(nx):
            for j in range(ny):
                acc = 0.0
                for c in range(d):
                    acc += abs(xs[i, c] - ys[j, c])
                if p != 1.0:
                    acc = acc**p
                out[i, j] = acc
        return out

    @njit(cache=True)
    def _assign_points_nb(points, centers):
        n, d = points.shape
        k = centers.shape[0]
        labels = np.empty(n, dtype=np.int64)
        inertia = 0.0
        for i in range(n):
            best = 0
            best_d = np.inf
            for j in range(k):
                acc = 0.0
                for c in range(d):
                    t = points[i, c] - centers[j, c]
                    acc += t * t
                if acc < best_d:
                    best_d = acc
                    best = j
            labels[i] = best
            inertia += best_d
        return labels, inertia

    @njit(cache=True)
    def _center_update_nb(points, labels, k):
        n, d = points.shape
        sums = np.zeros((k, d))
        counts = np.zeros(k, dtype=np.int64)
        for i in range(n):
            lab = labels[i]
            counts[lab] += 1
            for c in range(d):
                sums[lab, c] += points[i, c]
        return sums, counts

    l1_cost_matrix = _l1_cost_matrix_nb
    assign_points = _assign_points_nb
    center_update = _center_update_nb
else:
    l1_cost_matrix = _l1_cost_matrix_np
    assign_points = _assign_points_np
    center_update = _center_update_np

BACKEND = "numba" if HAS_NUMBA else "numpy"
