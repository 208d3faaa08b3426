# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: lasso coordinate descent and Kendall pair counting.

Mirrors the contracts (and sweep schedule) of ``_fallback``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef void _sweep(double[::1, :] X, double[::1] r, double[::1] w,
                 double[::1] xx, long[::1] indices, long n_idx,
                 double thresh, long n) noexcept:
    cdef long k, j, i
    cdef double rho, w_new, delta
    for k in range(n_idx):
        j = indices[k]
        if xx[j] == 0.0:
            continue
        rho = xx[j] * w[j]
        for i in range(n):
            rho += X[i, j] * r[i]
        if rho > thresh:
            w_new = (rho - thresh) / xx[j]
        elif rho < -thresh:
            w_new = (rho + thresh) / xx[j]
        else:
            w_new = 0.0
        delta = w_new - w[j]
        if delta != 0.0:
            for i in range(n):
                r[i] -= delta * X[i, j]
            w[j] = w_new


cdef double _objective(double[::1] r, double[::1] w, double alpha,
                       long n, long d) noexcept:
    cdef long i
    cdef double sse = 0.0, l1 = 0.0
    for i in range(n):
        sse += r[i] * r[i]
    for i in range(d):
        l1 += fabs(w[i])
    return sse + alpha * l1


cdef inline bint _improved(double prev, double curr, double tol) noexcept:
    cdef double scale = fabs(curr)
    if scale < 1.0:
        scale = 1.0
    return prev - curr > tol * scale


def lasso_cd(X, y, double alpha, double tol, long max_iter, w0=None):
    """See ``_fallback.lasso_cd``; identical contract."""
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] Xf = \
        np.asfortranarray(X, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef long n = Xf.shape[0], d = Xf.shape[1]
    cdef cnp.ndarray[double, ndim=1] w
    cdef cnp.ndarray[double, ndim=1] r
    if w0 is None:
        w = np.zeros(d)
        r = yv.copy()
    else:
        w = np.array(w0, dtype=np.float64)
        r = yv - Xf @ w
    cdef cnp.ndarray[double, ndim=1] xx = np.einsum("ij,ij->j", Xf, Xf)
    cdef cnp.ndarray[long, ndim=1] all_idx = np.arange(d, dtype=np.int64)
    cdef double thresh = 0.5 * alpha
    cdef double[::1, :] Xv = Xf
    cdef double[::1] rv = r, wv = w, xxv = xx
    cdef long[::1] idxv = all_idx
    cdef long sweeps = 0
    cdef bint converged = False
    cdef double prev_obj = _objective(rv, wv, alpha, n, d)
    cdef double curr_obj
    objectives = [prev_obj]
    cdef cnp.ndarray[long, ndim=1] active
    cdef long[::1] activev

    while sweeps < max_iter:
        _sweep(Xv, rv, wv, xxv, idxv, d, thresh, n)
        sweeps += 1
        curr_obj = _objective(rv, wv, alpha, n, d)
        objectives.append(curr_obj)
        if not _improved(prev_obj, curr_obj, tol):
            converged = True
            break
        prev_obj = curr_obj
        while sweeps < max_iter:
            active = np.nonzero(w)[0].astype(np.int64)
            if active.shape[0] == 0 or active.shape[0] == d:
                break
            activev = active
            _sweep(Xv, rv, wv, xxv, activev, active.shape[0], thresh, n)
            sweeps += 1
            curr_obj = _objective(rv, wv, alpha, n, d)
            objectives.append(curr_obj)
            if not _improved(prev_obj, curr_obj, tol):
                break
            prev_obj = curr_obj
    return w, np.asarray(objectives), converged


def kendall_stats(x, y):
    """See ``_fallback.kendall_stats``; identical contract."""
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef long m = xv.shape[0]
    cdef long i, j
    cdef long s = 0, tx = 0, ty = 0
    cdef double dx, dy
    for i in range(m):
        for j in range(i + 1, m):
            dx = xv[i] - xv[j]
            dy = yv[i] - yv[j]
            if dx == 0.0:
                tx += 1
            if dy == 0.0:
                ty += 1
            if dx != 0.0 and dy != 0.0:
                if (dx > 0.0) == (dy > 0.0):
                    s += 1
                else:
                    s -= 1
    return s, tx, ty


def perm_concordance(matrix, perms, rows, cols, sign_a):
    """See ``_fallback.perm_concordance``; identical contract."""
    M = np.ascontiguousarray(matrix, dtype=np.float64)
    # tie-preserving dense cell ranks: integer compares in the hot loop
    _, inverse = np.unique(M.ravel(), return_inverse=True)
    cdef cnp.ndarray[int, ndim=2] RK = \
        np.ascontiguousarray(inverse.reshape(M.shape), dtype=np.int32)
    cdef cnp.ndarray[long, ndim=2] P = np.ascontiguousarray(perms, dtype=np.int64)
    cdef cnp.ndarray[long, ndim=1] rr = np.ascontiguousarray(rows, dtype=np.int64)
    cdef cnp.ndarray[long, ndim=1] cc = np.ascontiguousarray(cols, dtype=np.int64)
    cdef cnp.ndarray[signed char, ndim=2] SA = \
        np.ascontiguousarray(sign_a, dtype=np.int8)
    cdef long n_perm = P.shape[0], m = rr.shape[0]
    cdef cnp.ndarray[long, ndim=1] out = np.empty(n_perm, dtype=np.int64)
    cdef cnp.ndarray[int, ndim=1] bt = np.empty(m, dtype=np.int32)
    cdef int[::1] btv = bt
    cdef long k, q, r_, s
    cdef int bq, d
    for k in range(n_perm):
        for q in range(m):
            btv[q] = RK[P[k, rr[q]], P[k, cc[q]]]
        s = 0
        for q in range(m):
            bq = btv[q]
            for r_ in range(q + 1, m):
                d = bq - btv[r_]
                s += SA[q, r_] * ((d > 0) - (d < 0))
        out[k] = s
    return out
