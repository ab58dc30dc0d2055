"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; used when the extension is not built or when
``GGQ_PURE_PYTHON`` is set.
"""

import numpy as np


def cheb_vander(x, n):
    """Values and derivatives of T_0..T_{n-1} at x, each of shape (n, len(x))."""
    t = np.ascontiguousarray(x, dtype=np.float64).ravel()
    V = np.empty((n, t.size))
    D = np.empty((n, t.size))
    if n > 0:
        V[0] = 1.0
        D[0] = 0.0
    if n > 1:
        V[1] = t
        D[1] = 1.0
    for j in range(2, n):
        V[j] = 2.0 * t * V[j - 1] - V[j - 2]
        D[j] = 2.0 * V[j - 1] + 2.0 * t * D[j - 1] - D[j - 2]
    return V, D


def lu_factor(a):
    LU = np.array(a, dtype=np.float64, order="C", copy=True)
    n = LU.shape[0]
    if LU.ndim != 2 or LU.shape[1] != n:
        raise ValueError("matrix must be square")
    perm = np.arange(n, dtype=np.intp)
    amax = np.abs(LU).max() if n else 0.0
    for k in range(n):
        r = k + int(np.argmax(np.abs(LU[k:, k])))
        if r != k:
            LU[[k, r]] = LU[[r, k]]
            perm[[k, r]] = perm[[r, k]]
        piv = LU[k, k]
        if piv == 0.0:
            continue
        LU[k + 1:, k] /= piv
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    umax = np.abs(np.triu(LU)).max() if n else 0.0
    growth = umax / amax if amax > 0.0 else 1.0
    return LU, perm, growth


def lu_solve(lu, perm, b, trans=False):
    A = np.asarray(lu, dtype=np.float64)
    rhs = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    if not trans:
        x = rhs[perm].copy()
        for i in range(n):
            x[i] -= A[i, :i] @ x[:i]
        for i in range(n - 1, -1, -1):
            x[i] = (x[i] - A[i, i + 1:] @ x[i + 1:]) / A[i, i]
        return x
    y = rhs.copy()
    for i in range(n):
        y[i] = (y[i] - A[:i, i] @ y[:i]) / A[i, i]
    for i in range(n - 1, -1, -1):
        y[i] -= A[i + 1:, i] @ y[i + 1:]
    x = np.empty(n)
    x[perm] = y
    return x
