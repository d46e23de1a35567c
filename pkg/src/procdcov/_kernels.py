"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public entry points (:func:`cross_exp_sums`, :func:`pairwise_distances`)
dispatch on :func:`procdcov._accel.numba_enabled`.  Both flavours reduce in
a fixed order per output row, so results do not depend on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel
from ._accel import njit

try:
    from numba import prange
except ImportError:  # pragma: no cover
    prange = range


# -- cross exponent sums ---------------------------------------------------
#
# F[i, k] = sum_j sum_l exp( sum_g w[g] * A[i, j, g] * B[k, l, g] )
#
# with j != i and l != k when ``exclude_diag``.  Every term of the V- and
# U-statistics that couples four or three indices is a sum or trace of F.


@njit(parallel=True, cache=True, nogil=True)
def _cross_exp_sums_numba(aw, b, exclude_diag):
    n = aw.shape[0]
    nb = b.shape[0]
    G = aw.shape[2]
    b_flat = b.reshape(nb * nb, G)
    out = np.zeros((n, nb))
    for i in prange(n):
        # exponents for every (k, l) against every j, one BLAS call per row
        m = np.dot(b_flat, np.ascontiguousarray(aw[i].T))
        for k in range(nb):
            acc = 0.0
            for l in range(nb):
                if exclude_diag and l == k:
                    continue
                r = k * nb + l
                for j in range(n):
                    if exclude_diag and j == i:
                        continue
                    acc += math.exp(m[r, j])
            out[i, k] = acc
    return out


def _cross_exp_row_numpy(aw, b_flat, nb, i, exclude_diag):
    n = aw.shape[0]
    m = np.exp(aw[i] @ b_flat.T).reshape(n, nb, nb)  # [j, k, l]
    if exclude_diag:
        m[i] = 0.0
        idx = np.arange(nb)
        m[:, idx, idx] = 0.0
    return m.sum(axis=2).sum(axis=0)


def _cross_exp_sums_numpy(aw, b, exclude_diag, workers=None):
    n = aw.shape[0]
    nb = b.shape[0]
    b_flat = b.reshape(nb * nb, -1)
    out = np.zeros((n, nb))

    def row(i):
        out[i] = _cross_exp_row_numpy(aw, b_flat, nb, i, exclude_diag)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(n)))
    else:
        for i in range(n):
            row(i)
    return out


def cross_exp_sums(a, b, weights, exclude_diag=False, workers=None):
    """Row/column exponent-sum matrix of two ``(n, n, G)`` kernel fields."""
    aw = np.ascontiguousarray(a * np.asarray(weights, dtype=float)[None, None, :])
    b = np.ascontiguousarray(b, dtype=float)
    if _accel.numba_enabled():
        with _accel.numba_threads(workers):
            return _cross_exp_sums_numba(aw, b, bool(exclude_diag))
    return _cross_exp_sums_numpy(aw, b, bool(exclude_diag), workers)


def matched_exp_sum(a, b, weights, exclude_diag=False):
    """``sum_{i,j} exp(sum_g w_g A[i,j,g] B[i,j,g])`` (O(n^2 G), numpy only)."""
    e = np.exp(np.einsum("ijg,ijg,g->ij", a, b, np.asarray(weights, dtype=float)))
    if exclude_diag:
        np.fill_diagonal(e, 0.0)
    return float(e.sum())


# -- pairwise Euclidean distances -----------------------------------------


@njit(parallel=True, cache=True, nogil=True)
def _pairwise_distances_numba(x):
    n, d = x.shape
    out = np.zeros((n, n))
    for i in prange(n):
        for j in range(i + 1, n):
            s = 0.0
            for c in range(d):
                diff = x[i, c] - x[j, c]
                s += diff * diff
            out[i, j] = math.sqrt(s)
    for i in range(n):
        for j in range(i):
            out[i, j] = out[j, i]
    return out


def _pairwise_distances_numpy(x):
    diff = x[:, None, :] - x[None, :, :]
    out = np.sqrt(np.einsum("ijc,ijc->ij", diff, diff))
    # exact symmetry, matching the numba kernel
    return np.triu(out, 1) + np.triu(out, 1).T


def pairwise_distances(x, workers=None):
    """``|x_i - x_j|`` for the rows of an ``(n, d)`` array."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if _accel.numba_enabled():
        with _accel.numba_threads(workers):
            return _pairwise_distances_numba(x)
    return _pairwise_distances_numpy(x)


# -- naive references (tests, selftest, benchmarks) ------------------------


def naive_vstat_terms(a, b, weights):
    """Unreordered quadruple loop over every index; O(n^4 G) in pure Python."""
    n = a.shape[0]
    w = np.asarray(weights, dtype=float)

    def ex(i, j, k, l):
        return math.exp(float(np.dot(w, a[i, j] * b[k, l])))

    t1 = sum(ex(i, j, i, j) for i in range(n) for j in range(n)) / n**2
    t2 = (
        sum(ex(i, j, k, l) for i in range(n) for j in range(n) for k in range(n) for l in range(n))
        / n**4
    )
    t3 = sum(ex(i, j, i, l) for i in range(n) for j in range(n) for l in range(n)) / n**3
    return t1, t2, t3


def naive_ustat_terms(a, b, weights):
    """As :func:`naive_vstat_terms` but over pairwise-distinct indices only."""
    n = a.shape[0]
    w = np.asarray(weights, dtype=float)

    def ex(i, j, k, l):
        return math.exp(float(np.dot(w, a[i, j] * b[k, l])))

    r = range(n)
    t1 = sum(ex(i, j, i, j) for i in r for j in r if i != j) / (n * (n - 1))
    t2 = sum(
        ex(i, j, k, l)
        for i in r
        for j in r
        for k in r
        for l in r
        if len({i, j, k, l}) == 4
    ) / (n * (n - 1) * (n - 2) * (n - 3))
    t3 = sum(ex(i, j, i, l) for i in r for j in r for l in r if len({i, j, l}) == 3) / (
        n * (n - 1) * (n - 2)
    )
    return t1, t2, t3
