# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Chebyshev recurrences and small dense LU."""

import numpy as np

from libc.math cimport fabs


def cheb_vander(x, Py_ssize_t n):
    """Values and derivatives of T_0..T_{n-1} at x, each of shape (n, len(x))."""
    cdef const double[::1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t m = xs.shape[0]
    V = np.empty((n, m))
    D = np.empty((n, m))
    cdef double[:, ::1] v = V
    cdef double[:, ::1] d = D
    cdef Py_ssize_t i, j
    cdef double t
    for i in range(m):
        t = xs[i]
        if n > 0:
            v[0, i] = 1.0
            d[0, i] = 0.0
        if n > 1:
            v[1, i] = t
            d[1, i] = 1.0
        for j in range(2, n):
            v[j, i] = 2.0 * t * v[j - 1, i] - v[j - 2, i]
            d[j, i] = 2.0 * v[j - 1, i] + 2.0 * t * d[j - 1, i] - d[j - 2, i]
    return V, D


def lu_factor(a):
    """Row-pivoted LU of a square matrix.

    Returns ``(lu, perm, growth)`` where ``lu`` packs the unit lower factor
    below the diagonal and U on and above it, ``perm[i]`` is the source row
    of row ``i`` of ``P A``, and ``growth`` is ``max|U| / max|A|``.
    Zero pivots are left in place; callers decide what counts as singular.
    """
    LU = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] A = LU
    cdef Py_ssize_t n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError("matrix must be square")
    perm = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] p = perm
    cdef Py_ssize_t i, j, k, r
    cdef double amax = 0.0, umax = 0.0, piv, best, tmp, f
    cdef Py_ssize_t ti
    for i in range(n):
        for j in range(n):
            if fabs(A[i, j]) > amax:
                amax = fabs(A[i, j])
    for k in range(n):
        r = k
        best = fabs(A[k, k])
        for i in range(k + 1, n):
            if fabs(A[i, k]) > best:
                best = fabs(A[i, k])
                r = i
        if r != k:
            for j in range(n):
                tmp = A[k, j]
                A[k, j] = A[r, j]
                A[r, j] = tmp
            ti = p[k]
            p[k] = p[r]
            p[r] = ti
        piv = A[k, k]
        if piv == 0.0:
            continue
        for i in range(k + 1, n):
            f = A[i, k] / piv
            A[i, k] = f
            if f != 0.0:
                for j in range(k + 1, n):
                    A[i, j] -= f * A[k, j]
    for i in range(n):
        for j in range(i, n):
            if fabs(A[i, j]) > umax:
                umax = fabs(A[i, j])
    growth = umax / amax if amax > 0.0 else 1.0
    return LU, perm, growth


def lu_solve(lu, perm, b, bint trans=False):
    """Solve ``A x = b`` (or ``A^T x = b``) from the output of :func:`lu_factor`."""
    cdef const double[:, ::1] A = np.ascontiguousarray(lu, dtype=np.float64)
    cdef const Py_ssize_t[::1] p = np.ascontiguousarray(perm, dtype=np.intp)
    cdef const double[::1] rhs = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    out = np.empty(n)
    cdef double[::1] x = out
    cdef double[::1] y
    if not trans:
        for i in range(n):
            s = rhs[p[i]]
            for j in range(i):
                s -= A[i, j] * x[j]
            x[i] = s
        for i in range(n - 1, -1, -1):
            s = x[i]
            for j in range(i + 1, n):
                s -= A[i, j] * x[j]
            x[i] = s / A[i, i]
        return out
    ytmp = np.empty(n)
    y = ytmp
    for i in range(n):
        s = rhs[i]
        for j in range(i):
            s -= A[j, i] * y[j]
        y[i] = s / A[i, i]
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(i + 1, n):
            s -= A[j, i] * y[j]
        y[i] = s
    for i in range(n):
        x[p[i]] = y[i]
    return out
