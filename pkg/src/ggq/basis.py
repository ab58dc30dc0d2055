"""Chebyshev sets, weight functions and their moments.

A Chebyshev set here is an ordered list of functions ``u_0, ..., u_{n}`` on an
interval.  The built-in families are

* ``ChebyshevPoly``: Chebyshev polynomials of the first kind mapped to [a, b];
* ``ChebyshevPolyPlusLog``: ``count/2`` polynomials followed by the same
  polynomials times ``log(t - a)``;
* ``MonicLaguerreType``: monomials ``((t - a)/s)^j`` on a truncated half-line;
* ``LaguerreTypePlusLog``: the monomials followed by monomials times
  ``log(t - a)``.

The polynomial part of every family may be switched between Chebyshev and
monomial form with ``params={"poly": "chebyshev" | "monomial"}``.
Completeness of the Chebyshev property is assumed, never checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _backend

EULER_GAMMA = 0.57721566490153286061

# 30-point Gauss-Legendre on [-1, 1], used per panel by the graded quadrature.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(30)


class QuadratureError(RuntimeError):
    """Adaptive moment quadrature did not reach its tolerance."""


class Family(str, Enum):
    CHEBYSHEV_POLY = "ChebyshevPoly"
    CHEBYSHEV_POLY_PLUS_LOG = "ChebyshevPolyPlusLog"
    MONIC_LAGUERRE = "MonicLaguerreType"
    LAGUERRE_PLUS_LOG = "LaguerreTypePlusLog"
    CUSTOM = "Custom"

    @property
    def has_log(self):
        return self in (Family.CHEBYSHEV_POLY_PLUS_LOG, Family.LAGUERRE_PLUS_LOG)


@dataclass(frozen=True)
class Interval:
    """Integration interval; ``half_line`` marks [a, inf) truncated at ``b``."""

    a: float
    b: float
    half_line: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"invalid interval [{self.a}, {self.b}]")

    @classmethod
    def truncated_half_line(cls, count, a=0.0):
        """[a, inf) cut at T = a + 2*count + 45, beyond which e^{-t} is negligible."""
        return cls(float(a), float(a) + 2.0 * count + 45.0, True)

    @property
    def length(self):
        return self.b - self.a

    def to_dict(self):
        return {"a": self.a, "b": self.b, "half_line": self.half_line}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["a"]), float(d["b"]), bool(d.get("half_line", False)))


@dataclass(frozen=True)
class BasisDescriptor:
    family: Family
    count: int
    interval: Interval
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.count < 2:
            raise ValueError("a Chebyshev set needs at least 2 elements")
        if self.family.has_log and self.count % 2:
            raise ValueError(f"{self.family.value} needs an even element count, got {self.count}")
        poly = self.params.get("poly", "chebyshev")
        if poly not in ("chebyshev", "monomial"):
            raise ValueError(f"unknown polynomial form {poly!r}")

    def to_dict(self):
        return {
            "family": self.family.value,
            "count": self.count,
            "interval": self.interval.to_dict(),
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(Family(d["family"]), int(d["count"]), Interval.from_dict(d["interval"]),
                   dict(d.get("params", {})))


class ChebyshevSet:
    """An ordered set of basis functions with vectorized evaluation.

    ``values(t)`` and ``derivatives(t)`` return arrays of shape
    ``(count, len(t))`` (or ``(m, len(t))`` when ``m`` is given).
    """

    def __init__(self, descriptor: BasisDescriptor, eval: Callable, deriv: Optional[Callable] = None,
                 values: Optional[Callable] = None, derivatives: Optional[Callable] = None):
        self.descriptor = descriptor
        self._eval = eval
        self._deriv = deriv
        self._values = values
        self._derivatives = derivatives

    def __repr__(self):
        d = self.descriptor
        return f"ChebyshevSet({d.family.value}, count={d.count}, [{d.interval.a}, {d.interval.b}])"

    @property
    def count(self):
        return self.descriptor.count

    @property
    def interval(self):
        return self.descriptor.interval

    @property
    def a(self):
        return self.descriptor.interval.a

    @property
    def b(self):
        return self.descriptor.interval.b

    @property
    def differentiable(self):
        return self._deriv is not None or self._derivatives is not None

    def eval(self, j, t):
        if not 0 <= j < self.count:
            raise IndexError(f"basis index {j} out of range 0..{self.count - 1}")
        out = self._eval(j, np.asarray(t, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, j, t):
        if not self.differentiable:
            raise ValueError("this Chebyshev set has no derivatives")
        if not 0 <= j < self.count:
            raise IndexError(f"basis index {j} out of range 0..{self.count - 1}")
        if self._deriv is not None:
            out = self._deriv(j, np.asarray(t, dtype=float))
        else:
            out = self.derivatives(np.atleast_1d(t), j + 1)[j]
            if np.ndim(t) == 0:
                out = out[0]
        return float(out) if np.ndim(out) == 0 else out

    def values(self, t, m=None):
        m = self.count if m is None else m
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self._values is not None:
            return self._values(t, m)
        return np.array([np.broadcast_to(self._eval(j, t), t.shape) for j in range(m)], dtype=float)

    def derivatives(self, t, m=None):
        if not self.differentiable:
            raise ValueError("this Chebyshev set has no derivatives")
        m = self.count if m is None else m
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self._derivatives is not None:
            return self._derivatives(t, m)
        return np.array([np.broadcast_to(self._deriv(j, t), t.shape) for j in range(m)], dtype=float)


def _poly_block(descriptor):
    """Return (values, derivs) callables for the polynomial part: t -> (m, len t)."""
    iv = descriptor.interval
    a, b = iv.a, iv.b
    poly = descriptor.params.get("poly", "chebyshev")
    if poly == "monomial":
        s = float(descriptor.params.get("scale", 1.0))

        def block(t, m):
            y = (t - a) / s
            V = np.empty((m, t.size))
            D = np.empty((m, t.size))
            V[0] = 1.0
            D[0] = 0.0
            for j in range(1, m):
                V[j] = V[j - 1] * y
                D[j] = j * V[j - 1] / s
            return V, D

        return block

    c, h = 0.5 * (a + b), 0.5 * (b - a)

    def block(t, m):
        V, D = _backend.kernels.cheb_vander((t - c) / h, m)
        return V, D / h

    return block


def _builtin_callables(descriptor):
    fam = descriptor.family
    a = descriptor.interval.a
    block = _poly_block(descriptor)
    if not fam.has_log:
        def values(t, m):
            return block(t, m)[0]

        def derivatives(t, m):
            return block(t, m)[1]

        return values, derivatives

    half = descriptor.count // 2

    def _logs(t):
        d = t - a
        if np.any(d <= 0.0):
            raise ValueError(f"log-singular basis is undefined at or left of a={a}")
        return d, np.log(d)

    def values(t, m):
        V, _ = block(t, min(m, half))
        if m <= half:
            return V
        _, lg = _logs(t)
        return np.vstack([V, V[: m - half] * lg])

    def derivatives(t, m):
        V, D = block(t, min(m, half))
        if m <= half:
            return D
        d, lg = _logs(t)
        r = m - half
        return np.vstack([D, D[:r] * lg + V[:r] / d])

    return values, derivatives


def make_set(descriptor: BasisDescriptor, eval: Optional[Callable] = None,
             deriv: Optional[Callable] = None) -> ChebyshevSet:
    """Build a :class:`ChebyshevSet` from a descriptor.

    Custom families must pass ``eval(j, t)``; ``deriv(j, t)`` is optional and
    leaving it out puts the solvers in derivative-free mode.
    """
    if not isinstance(descriptor, BasisDescriptor):
        raise TypeError("descriptor must be a BasisDescriptor")
    if descriptor.family is Family.CUSTOM:
        if eval is None:
            raise ValueError("custom families must supply eval(j, t)")
        return ChebyshevSet(descriptor, eval, deriv)
    values, derivatives = _builtin_callables(descriptor)

    def ev(j, t):
        r = values(np.atleast_1d(t), j + 1)[j]
        return r[0] if np.ndim(t) == 0 else r.reshape(np.shape(t))

    def dv(j, t):
        r = derivatives(np.atleast_1d(t), j + 1)[j]
        return r[0] if np.ndim(t) == 0 else r.reshape(np.shape(t))

    return ChebyshevSet(descriptor, ev, dv, values=values, derivatives=derivatives)


def legendre_set(n_points, a=-1.0, b=1.0):
    """Chebyshev polynomials on [a, b] with 2*n_points elements."""
    return make_set(BasisDescriptor(Family.CHEBYSHEV_POLY, 2 * n_points, Interval(a, b)))


def log_set(n_points, a=0.0, b=1.0, poly="chebyshev"):
    """Polynomials and polynomials times log(t - a), 2*n_points elements."""
    return make_set(BasisDescriptor(Family.CHEBYSHEV_POLY_PLUS_LOG, 2 * n_points, Interval(a, b),
                                    {"poly": poly}))


def laguerre_set(n_points, log=False, scale=1.0):
    """Monomials (optionally with log companions) on the truncated half-line, 2*n_points elements."""
    count = 2 * n_points
    fam = Family.LAGUERRE_PLUS_LOG if log else Family.MONIC_LAGUERRE
    params = {"poly": "monomial"}
    if scale != 1.0:
        params["scale"] = scale
    return make_set(BasisDescriptor(fam, count, Interval.truncated_half_line(count), params))


class WeightKind(str, Enum):
    UNIT = "Unit"
    EXP_DECAY = "ExpDecay"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class WeightSpec:
    kind: WeightKind
    fn: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if self.kind is WeightKind.CUSTOM and self.fn is None:
            raise ValueError("custom weights need a function")

    @classmethod
    def unit(cls):
        return cls(WeightKind.UNIT)

    @classmethod
    def exp_decay(cls):
        return cls(WeightKind.EXP_DECAY)

    @classmethod
    def custom(cls, fn):
        return cls(WeightKind.CUSTOM, fn)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WeightKind.UNIT:
            return np.ones_like(t)
        if self.kind is WeightKind.EXP_DECAY:
            return np.exp(-t)
        return np.asarray(self.fn(t), dtype=float)


class MomentSource(str, Enum):
    ANALYTIC = "Analytic"
    ADAPTIVE_QUADRATURE = "AdaptiveQuadrature"


@dataclass(frozen=True)
class MomentVector:
    values: np.ndarray
    source: MomentSource

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("moment vector must be a non-empty 1-d sequence")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "source", MomentSource(self.source))

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def laguerre_log_moment(j: int) -> float:
    """Integral of ``x^j log(x) e^{-x}`` over [0, inf), i.e. Gamma'(j+1).

    Equals ``j! (H_j - gamma)`` with ``H_0 = 0``. Raises ``OverflowError``
    once ``j!`` no longer fits in a double.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    fact = float(math.factorial(j))  # OverflowError for j > 170
    harmonic = math.fsum(1.0 / i for i in range(1, j + 1))
    return fact * (harmonic - EULER_GAMMA)


def _analytic_moments(cset, weight, m):
    d = cset.descriptor
    fam, iv = d.family, d.interval
    poly = d.params.get("poly", "chebyshev")
    L = iv.length
    if weight.kind is WeightKind.UNIT and not iv.half_line:
        if fam is Family.CHEBYSHEV_POLY:
            if poly == "chebyshev":
                j = np.arange(m)
                vals = np.where(j % 2 == 0, 2.0 / (1.0 - np.where(j == 1, 0, j) ** 2.0), 0.0)
                return 0.5 * L * vals
            s = float(d.params.get("scale", 1.0))
            return np.array([L ** (j + 1) / ((j + 1) * s ** j) for j in range(m)])
        if fam is Family.CHEBYSHEV_POLY_PLUS_LOG and poly == "monomial":
            s = float(d.params.get("scale", 1.0))
            half = d.count // 2
            out = []
            for j in range(m):
                if j < half:
                    out.append(L ** (j + 1) / ((j + 1) * s ** j))
                else:
                    p = j - half + 1
                    out.append(L ** p / (p * s ** (p - 1)) * (math.log(L) - 1.0 / p))
            return np.array(out)
        return None
    if weight.kind is WeightKind.EXP_DECAY and iv.half_line and poly == "monomial" and iv.a == 0.0:
        if fam not in (Family.MONIC_LAGUERRE, Family.LAGUERRE_PLUS_LOG):
            return None
        s = float(d.params.get("scale", 1.0))
        half = d.count // 2 if fam.has_log else d.count
        out = []
        for j in range(m):
            if j < half:
                out.append(float(math.factorial(j)) / s ** j)
            else:
                p = j - half
                out.append(laguerre_log_moment(p) / s ** p)
        return np.array(out)
    return None


def _gl_panel(fn, lo, hi):
    x = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
    return fn(x) @ (0.5 * (hi - lo) * _GL_W)


def graded_quadrature(fn, a, b, tol=1e-14, ratio=0.25, max_depth=80, max_panels=4000):
    """Integrate a vector-valued ``fn(t) -> (m, len t)`` over [a, b].

    The left piece [a, a + h], ``h = (b - a)/8``, is covered by geometrically
    graded panels shrinking toward ``a`` by ``ratio``; this restores fast
    convergence for integrable endpoint singularities such as ``log(t - a)``.
    The right piece is split adaptively until two-level estimates agree.
    Every panel uses 30-point Gauss-Legendre. The error target is absolute,
    ``tol * max(1, max |result|)``.
    """
    h = (b - a) / 8.0
    # regular part first to fix the scale of the result
    total = np.zeros_like(_gl_panel(fn, a + h, b))
    stack = [(a + h, b, _gl_panel(fn, a + h, b))]
    panels = 0
    scale = max(1.0, float(np.max(np.abs(stack[0][2]))))
    while stack:
        lo, hi, est = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _gl_panel(fn, lo, mid), _gl_panel(fn, mid, hi)
        panels += 1
        if np.max(np.abs(left + right - est)) <= tol * scale or hi - lo < 1e-12 * (b - a):
            total = total + left + right
        elif panels > max_panels:
            raise QuadratureError("adaptive quadrature exceeded its panel budget")
        else:
            stack.append((lo, mid, left))
            stack.append((mid, hi, right))
    scale = max(scale, float(np.max(np.abs(total))))
    hi = a + h
    for _ in range(max_depth):
        lo = a + (hi - a) * ratio
        part = _gl_panel(fn, lo, hi)
        total = total + part
        hi = lo
        # the neglected remainder is bounded by a geometric tail of panel sizes
        if np.max(np.abs(part)) <= 1e-3 * tol * scale:
            return total
    raise QuadratureError(f"graded quadrature did not reach tol={tol} within depth {max_depth}")


def moments(cset: ChebyshevSet, weight: WeightSpec, m: Optional[int] = None, tol: float = 1e-14,
            method: str = "auto") -> MomentVector:
    """First ``m`` moments ``c_j = int u_j(t) w(t) dt`` of a Chebyshev set.

    ``method`` is ``"auto"`` (closed forms where known, else quadrature),
    ``"analytic"`` (raise if no closed form) or ``"quadrature"``.
    """
    m = cset.count if m is None else m
    if not 1 <= m <= cset.count:
        raise ValueError(f"m must lie in 1..{cset.count}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in ("auto", "analytic", "quadrature"):
        raise ValueError(f"unknown moment method {method!r}")
    if method != "quadrature":
        vals = _analytic_moments(cset, weight, m)
        if vals is not None:
            return MomentVector(vals, MomentSource.ANALYTIC)
        if method == "analytic":
            raise ValueError("no closed-form moments for this set and weight")

    def integrand(t):
        return cset.values(t, m) * weight.eval(t)

    vals = graded_quadrature(integrand, cset.a, cset.b, tol=tol)
    return MomentVector(vals, MomentSource.ADAPTIVE_QUADRATURE)
