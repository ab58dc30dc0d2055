"""Newton solves for canonical representations and the monotone objectives.

A canonical state carries ``k + 1`` points ``x_1 = xi < x_2 < ... < x_{k+1}``
and their weights.  Two systems are solved:

* ``UPPER_FIXED_B``: ``x_{k+1} = b`` is pinned; the free unknowns are all
  weights and ``x_2..x_k`` (``2k`` unknowns), matching moments ``0..2k-1``.
* ``LOWER_FREE``: only ``x_1`` is pinned; ``2k + 1`` unknowns match moments
  ``0..2k``.

The objective of a state is the mismatch in the first moment it does not
govern: ``F`` (moment ``2k``) for the pinned system and ``G`` (moment
``2k + 1``) for the free one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .densesolve import LUFactor, SingularSystemError

_EPS = np.finfo(float).eps


class NewtonDivergence(RuntimeError):
    """Newton did not converge; the caller should shorten its xi step."""


class CanonicalKind(str, Enum):
    UPPER_FIXED_B = "UpperFixedB"
    LOWER_FREE = "LowerFree"


@dataclass(frozen=True)
class NodeWeightState:
    xi: float
    points: np.ndarray
    weights: np.ndarray
    kind: CanonicalKind
    k: int

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        kind = CanonicalKind(self.kind)
        if p.shape != (self.k + 1,) or w.shape != p.shape:
            raise ValueError(f"a k={self.k} state needs {self.k + 1} points and weights")
        if kind is CanonicalKind.UPPER_FIXED_B and self.k < 1:
            raise ValueError("the pinned system needs k >= 1")
        if p[0] != self.xi:
            raise ValueError("the first point must equal xi")
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def n_moments(self):
        """Number of moments the state's system matches."""
        return 2 * self.k if self.kind is CanonicalKind.UPPER_FIXED_B else 2 * self.k + 1

    @property
    def free_points(self):
        """Indices of points that are unknowns of the system."""
        stop = self.k if self.kind is CanonicalKind.UPPER_FIXED_B else self.k + 1
        return np.arange(1, stop)

    @property
    def objective(self):
        return "F" if self.kind is CanonicalKind.UPPER_FIXED_B else "G"

    def unknowns(self):
        return np.concatenate([self.weights, self.points[self.free_points]])

    def with_unknowns(self, z, xi=None):
        xi = self.xi if xi is None else float(xi)
        w = z[: self.k + 1]
        p = np.array(self.points)
        p[0] = xi
        p[self.free_points] = z[self.k + 1:]
        return NodeWeightState(xi, p, w, self.kind, self.k)


class Tangent(NamedTuple):
    dpoints: np.ndarray
    dweights: np.ndarray


def basis_derivatives(cset, x, m):
    """Derivatives of the first ``m`` basis functions at ``x``.

    Uses the set's own derivatives when it has them, otherwise central
    differences kept inside [a, b].
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if cset.differentiable:
        return cset.derivatives(x, m)
    a, b = cset.a, cset.b
    h = np.cbrt(_EPS) * np.maximum(np.abs(x), 1e-3 * (b - a))
    h = np.minimum(h, np.maximum(0.5 * (x - a), 0.0))
    lo = np.where(h > 0, x - h, x)
    h_r = np.minimum(np.cbrt(_EPS) * np.maximum(np.abs(x), 1e-3 * (b - a)), b - x)
    hi = x + h_r
    span = hi - lo
    span = np.where(span > 0, span, 1.0)
    return (cset.values(hi, m) - cset.values(lo, m)) / span


def _residual(state, cset, c):
    nm = state.n_moments
    return cset.values(state.points, nm) @ state.weights - c[:nm]


def _jacobian(state, cset):
    nm = state.n_moments
    U = cset.values(state.points, nm)
    free = state.free_points
    if free.size == 0:
        return U
    D = basis_derivatives(cset, state.points[free], nm)
    return np.hstack([U, D * state.weights[free]])


def _equilibrated_solve(J, rhs, row_scale=None):
    """Solve ``J dz = rhs`` after scaling rows by ``row_scale`` and columns to unit max."""
    if row_scale is not None:
        J = J * row_scale[:, None]
        rhs = rhs * row_scale
    col = _column_scale(J)
    return LUFactor(J * col).solve(rhs) * col


def _column_scale(J):
    col = np.max(np.abs(J), axis=0)
    return 1.0 / np.where(col > 0, col, 1.0)


def _valid_order(state, cset):
    p = state.points
    if not np.all(np.isfinite(p)) or not np.all(np.isfinite(state.weights)):
        return False
    if p[0] < cset.a or p[-1] > cset.b:
        return False
    return bool(np.all(np.diff(p) > 0))


def residual_scale(c):
    """Per-equation scale ``1 / max(|c_j|, 1)``."""
    return 1.0 / np.maximum(np.abs(np.asarray(c, dtype=float)), 1.0)


def scaled_residual(state, cset, moments):
    c = np.asarray(moments, dtype=float)
    nm = state.n_moments
    return float(np.max(np.abs(_residual(state, cset, c)) * residual_scale(c[:nm])))


def newton_canonical(state: NodeWeightState, cset, moments, tol: float = 1e-13,
                     max_iter: int = 50, max_halvings: int = 20) -> NodeWeightState:
    """Solve the state's exactness system with ``x_1`` (and ``b``) held fixed.

    Convergence means ``max_j |residual_j| / max(|c_j|, 1) <= tol``. A step
    that breaks point ordering or leaves [a, b] is halved up to
    ``max_halvings`` times; failure raises :class:`NewtonDivergence`.
    """
    c = np.asarray(moments, dtype=float)
    nm = state.n_moments
    if c.size < nm:
        raise ValueError(f"state needs {nm} moments, got {c.size}")
    if not _valid_order(state, cset):
        raise NewtonDivergence("starting state violates point ordering")
    s = residual_scale(c[:nm])
    r = _residual(state, cset, c)
    res = float(np.max(np.abs(r) * s))
    stalled = 0
    for _ in range(max_iter):
        if res <= tol:
            return state
        try:
            dz = _equilibrated_solve(_jacobian(state, cset), -r, s)
        except SingularSystemError as exc:
            raise NewtonDivergence(f"singular Jacobian at xi={state.xi}") from exc
        z = state.unknowns()
        for _ in range(max_halvings + 1):
            trial = state.with_unknowns(z + dz)
            if _valid_order(trial, cset):
                break
            dz = 0.5 * dz
        else:
            raise NewtonDivergence(f"ordering violated at xi={state.xi} after damping")
        r_new = _residual(trial, cset, c)
        res_new = float(np.max(np.abs(r_new) * s))
        # at the rounding floor the residual stops moving; accept near tol
        if res_new >= 0.5 * res:
            stalled += 1
            if stalled >= 3:
                if res_new <= 10 * tol:
                    return trial
                raise NewtonDivergence(f"Newton stalled at residual {res_new:.3e}, xi={state.xi}")
        else:
            stalled = 0
        state, r, res = trial, r_new, res_new
    if res <= tol:
        return state
    raise NewtonDivergence(f"no convergence in {max_iter} iterations (residual {res:.3e})")


def tangent(state: NodeWeightState, cset) -> Tangent:
    """Derivatives of points and weights with respect to ``xi``.

    Solves ``J dz = -w_1 u'(xi)`` for the free unknowns; ``dx_1 = 1`` and a
    pinned ``x_{k+1}`` has derivative 0.
    """
    nm = state.n_moments
    rhs = -state.weights[0] * basis_derivatives(cset, state.points[:1], nm)[:, 0]
    dz = _equilibrated_solve(_jacobian(state, cset), rhs)
    dw = dz[: state.k + 1]
    dp = np.zeros(state.k + 1)
    dp[0] = 1.0
    dp[state.free_points] = dz[state.k + 1:]
    return Tangent(dp, dw)


def _check_which(state, which):
    if which not in ("F", "G"):
        raise ValueError("which must be 'F' or 'G'")
    if which != state.objective:
        raise ValueError(f"objective {which} does not belong to a {state.kind.value} state")


def eval_objective(state: NodeWeightState, cset, target_moment: float, which: str) -> float:
    """``sum_i w_i u_m(x_i) - c_m`` with ``m`` the first ungoverned moment."""
    _check_which(state, which)
    m = state.n_moments
    return float(cset.values(state.points, m + 1)[m] @ state.weights - target_moment)


def eval_objective_derivative(state: NodeWeightState, tan: Tangent, cset, which: str) -> float:
    """Derivative of :func:`eval_objective` along the continuation path."""
    _check_which(state, which)
    if not cset.differentiable:
        raise ValueError("objective derivatives need a differentiable set; use bisection")
    m = state.n_moments
    u = cset.values(state.points, m + 1)[m]
    du = cset.derivatives(state.points, m + 1)[m]
    return float(tan.dweights @ u + np.sum(state.weights * du * tan.dpoints))


def condition_estimate(state, cset, moments=None):
    """1-norm condition estimate of the state's Jacobian after row and column scaling."""
    J = _jacobian(state, cset)
    if moments is not None:
        J = J * residual_scale(np.asarray(moments, dtype=float)[: state.n_moments])[:, None]
    try:
        return LUFactor(J * _column_scale(J)).condition_estimate()
    except SingularSystemError:
        return float("inf")
