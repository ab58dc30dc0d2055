"""Small dense linear solves with a conditioning diagnostic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend

# Pivots below this multiple of eps * n * max|A| are treated as exact zeros.
_SINGULAR_FACTOR = 1.0


class SingularSystemError(np.linalg.LinAlgError):
    """A pivot vanished to machine precision."""


@dataclass(frozen=True)
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ValueError("rhs length does not match the matrix")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("system has non-finite entries")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "rhs", b)


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    condition_estimate: float
    pivot_growth: float


class LUFactor:
    """Row-pivoted LU factorization backed by the active kernel."""

    def __init__(self, matrix):
        A = np.asarray(matrix, dtype=float)
        self.n = A.shape[0]
        self.norm1 = float(np.abs(A).sum(axis=0).max()) if self.n else 0.0
        self.lu, self.perm, self.growth = _backend.kernels.lu_factor(A)
        amax = float(np.abs(A).max()) if self.n else 0.0
        piv = np.abs(np.diag(self.lu))
        if self.n and piv.min() <= _SINGULAR_FACTOR * np.finfo(float).eps * self.n * amax:
            raise SingularSystemError(f"singular pivot at column {int(np.argmin(piv))}")

    def solve(self, b, trans=False):
        return _backend.kernels.lu_solve(self.lu, self.perm, np.asarray(b, dtype=float), trans)

    def condition_estimate(self, iterations=5):
        """1-norm condition estimate (Hager/Higham power iteration)."""
        n = self.n
        if n == 0:
            return 1.0
        x = np.full(n, 1.0 / n)
        est = 0.0
        for it in range(iterations):
            y = self.solve(x)
            est = max(est, float(np.abs(y).sum()))
            s = np.where(y >= 0.0, 1.0, -1.0)
            z = self.solve(s, trans=True)
            j = int(np.argmax(np.abs(z)))
            if it > 0 and abs(z[j]) <= z @ x:
                break
            x = np.zeros(n)
            x[j] = 1.0
        return max(1.0, self.norm1 * est)


def solve(system: DenseSystem) -> SolveReport:
    """Solve ``A x = b`` by partial-pivoting elimination.

    One step of residual refinement is applied when the condition estimate
    exceeds 1e8.
    """
    f = LUFactor(system.matrix)
    x = f.solve(system.rhs)
    cond = f.condition_estimate()
    if cond > 1e8:
        r = system.rhs - system.matrix @ x
        x = x + f.solve(r)
    return SolveReport(x, cond, float(f.growth))


def interpolatory_weights(cset, points, moments) -> np.ndarray:
    """Weights of the interpolatory rule on ``points`` for the first len(points) moments."""
    x = np.asarray(points, dtype=float)
    c = np.asarray(moments, dtype=float)
    k = x.size
    if c.size != k:
        raise ValueError(f"need {k} moments for {k} points, got {c.size}")
    if k > 1 and np.any(np.diff(x) <= 0):
        raise ValueError("points must be strictly increasing")
    if x[0] < cset.a or x[-1] > cset.b:
        raise ValueError("points must lie in the interval")
    return solve(DenseSystem(cset.values(x, k), c)).solution
