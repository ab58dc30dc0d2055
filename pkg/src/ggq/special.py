"""Bessel/Hankel helpers and the steepest-descent oscillatory example.

The integral

    I[f] = int_0^1 f(x) H_0^(1)(k x) e^{i k x} dx

is split along the two steepest-descent paths leaving x = 0 and x = 1. With
t = 2 k y both become half-line integrals against e^{-t}:

    I[f] = (i/2k)      int_0^inf f(i t/2k)     H_0^(1)(i t/2)   e^{t/2} e^{-t} dt
         - (i/2k) e^{ik} int_0^inf f(1 + i t/2k) H_0^(1)(k + i t/2) e^{t/2} e^{-t} dt.

The first integrand is log-singular at t = 0 and is handled by a
generalized Gauss rule for polynomials and log times polynomials; the second
is smooth and uses a Gauss-Laguerre rule with half as many points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special as sp

from .basis import WeightSpec, laguerre_set
from .continuation import QuadratureRule, compute_rule

# k values and base point counts of the standard demo grid
DEMO_FREQUENCIES = (10, 20, 30, 40)
DEMO_POINT_COUNTS = (1, 2, 3, 4)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(30)


def bessel_k0(x):
    """Modified Bessel function K_0 for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("K0 needs a positive argument")
    out = sp.k0(x)
    return float(out) if out.ndim == 0 else out


def bessel_k0_scaled(x):
    """``K_0(x) e^{x}``, finite for large x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("K0 needs a positive argument")
    out = sp.k0e(x)
    return float(out) if out.ndim == 0 else out


def hankel0_shifted(z):
    """``H_0^(1)(z) e^{-i z}`` for ``|z| >= 10``, the oscillation factored out."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) < 10):
        raise ValueError("hankel0_shifted is meant for |z| >= 10")
    out = sp.hankel1e(0, z)
    return complex(out) if out.ndim == 0 else out


def default_f(z):
    return np.cos(z) + np.sin(z)


@dataclass(frozen=True)
class OscillatoryProblem:
    k_freq: float
    f: Callable = default_f
    K: int = 1

    def __post_init__(self):
        if self.k_freq < 10:
            raise ValueError("the steepest-descent split here assumes k >= 10")
        if self.K < 1:
            raise ValueError("K must be at least 1")


def _singular_bracket(problem, t):
    k = problem.k_freq
    # H_0^(1)(i s) = (2 / (i pi)) K_0(s)
    return problem.f(1j * t / (2 * k)) * (2.0 / (1j * np.pi)) * sp.k0e(t / 2)


def _regular_bracket(problem, t):
    k = problem.k_freq
    z = k + 0.5j * t
    return problem.f(1 + 1j * t / (2 * k)) * sp.hankel1e(0, z) * np.exp(1j * k)


@lru_cache(maxsize=None)
def demo_rules(K):
    """(2K-point log-Laguerre rule, K-point Laguerre rule), both computed here."""
    log_set = laguerre_set(2 * K, log=True)
    lag_set = laguerre_set(K)
    rule_log = compute_rule(log_set, WeightSpec.exp_decay(), 2 * K)[0]
    rule_lag = compute_rule(lag_set, WeightSpec.exp_decay(), K)[0]
    return rule_log, rule_lag


def reference_integral(k, f=default_f, depth=60):
    """``I[f]`` on [0, 1] by graded-panel Gauss-Legendre quadrature.

    Panels shrink geometrically (ratio 1/4) toward the log singularity at 0
    inside [0, min(1, 1/k)]; the rest is cut into panels of width at most 1/k.
    Each panel uses 30 points.
    """
    def g(x):
        return f(x) * sp.hankel1(0, k * x) * np.exp(1j * k * x)

    def panel(lo, hi):
        x = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
        return np.sum(g(x) * _GL_W) * 0.5 * (hi - lo)

    x0 = min(1.0, 1.0 / k)
    n = int(np.ceil((1.0 - x0) * k)) if x0 < 1 else 0
    edges = np.linspace(x0, 1.0, n + 1) if n else np.array([x0])
    parts = [panel(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    hi = x0
    for _ in range(depth):
        lo = 0.25 * hi
        parts.append(panel(lo, hi))
        hi = lo
    return complex(np.sum(parts[::-1]))


def steepest_descent_demo(problem: OscillatoryProblem, rule_log: QuadratureRule = None,
                          rule_laguerre: QuadratureRule = None, reference=None):
    """Approximate ``I[f]`` along steepest-descent paths.

    Returns ``(approx, abs_error)`` with the error taken against
    :func:`reference_integral` unless ``reference`` is given.
    """
    if rule_log is None or rule_laguerre is None:
        rule_log, rule_laguerre = demo_rules(problem.K)
    k = problem.k_freq
    first = np.sum(rule_log.weights * _singular_bracket(problem, rule_log.points))
    second = np.sum(rule_laguerre.weights * _regular_bracket(problem, rule_laguerre.points))
    approx = 1j / (2 * k) * first - 1j / (2 * k) * np.exp(1j * k) * second
    if reference is None:
        reference = reference_integral(k, problem.f)
    return complex(approx), float(abs(approx - reference))


def error_table(ks=DEMO_FREQUENCIES, Ks=DEMO_POINT_COUNTS, f=default_f):
    """Absolute errors, rows indexed by K and columns by k."""
    refs = {k: reference_integral(k, f) for k in ks}
    return np.array([[steepest_descent_demo(OscillatoryProblem(k, f, K), reference=refs[k])[1]
                      for k in ks] for K in Ks])
