"""Continuation in the first node: from the 1-point rule to the l-point rule.

Starting at ``xi = b`` the first node slides toward ``a``.  Each phase keeps
a canonical representation along the path and stops where its objective
changes sign:

* the F-phase (right endpoint pinned, new point at ``b`` with weight 0)
  ends in the upper principal representation of ``2k + 1`` moments;
* the G-phase (endpoint released) ends in the lower principal representation
  of ``2k + 2`` moments, i.e. the ``k + 1``-point Gaussian rule.

The breakpoints satisfy
``a < lo_l < up_{l-1} < lo_{l-1} < ... < up_1 < lo_1 < up_0 = b``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import solver
from .basis import ChebyshevSet, MomentVector, moments as compute_moments
from .densesolve import SingularSystemError
from .solver import CanonicalKind, NewtonDivergence, NodeWeightState

log = logging.getLogger(__name__)

LOWER = "LowerPrincipal"
UPPER = "UpperPrincipal"


class ContinuationError(RuntimeError):
    """Fatal failure of a continuation phase; ``diagnostics`` says where."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class Controls:
    """Tolerances and step control for :func:`compute_rule`."""

    newton_tol: float = 1e-13
    max_iter: int = 50
    objective_tol: float = 1e-12
    verify_tol: float = 1e-11
    moment_tol: float = 1e-14
    initial_step_divisor: float = 64.0
    max_step_fraction: float = 1.0 / 200.0
    min_step_fraction: float = 1e-13
    growth: float = 1.5
    max_root_iter: int = 200
    direction: str = "right"
    trace: bool = True

    def __post_init__(self):
        if self.direction not in ("right", "left"):
            raise ValueError("direction must be 'right' or 'left'")


@dataclass(frozen=True)
class Breakpoints:
    lower: tuple
    upper: tuple

    def chain(self):
        """All breakpoints in increasing order, ending with ``up_0 = b``."""
        out = []
        for i in range(len(self.lower) - 1, -1, -1):
            out.append(self.lower[i])
            out.append(self.upper[i])
        return out

    def critical_values(self):
        """The chain without its trivial anchor ``up_0 = b``."""
        return self.chain()[:-1]

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(float(v) for v in d["lower"]), tuple(float(v) for v in d["upper"]))


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    label: str
    order: int
    residuals: np.ndarray
    condition_estimate: float
    interval: tuple

    def __post_init__(self):
        for name in ("points", "weights", "residuals"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.points.shape != self.weights.shape:
            raise ValueError("points and weights differ in length")
        if self.label not in (LOWER, UPPER):
            raise ValueError(f"unknown label {self.label!r}")
        object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))

    @property
    def size(self):
        return self.points.size

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0

    def integrate(self, f):
        return np.sum(self.weights * f(self.points))


@dataclass(frozen=True)
class TraceSample:
    xi: float
    points: np.ndarray
    weights: np.ndarray
    phase: str
    k: int
    is_breakpoint: bool = False
    objective: float = float("nan")


@dataclass
class ContinuationTrace:
    samples: list
    breakpoints: Breakpoints
    interval: tuple
    l: int
    reflected: bool = False


@dataclass
class _Path:
    """Accepted states of one phase with what is needed to predict the next."""

    state: NodeWeightState
    tan: Optional[solver.Tangent] = None
    prev: Optional[NodeWeightState] = None


def _pad(state, l, b):
    p = np.full(l, b, dtype=float)
    w = np.zeros(l)
    n = state.points.size
    p[:n] = state.points
    w[:n] = state.weights
    return p, w


def _sample(state, l, b, phase, k, is_breakpoint=False, objective=float("nan")):
    p, w = _pad(state, l, b)
    return TraceSample(state.xi, p, w, phase, k, is_breakpoint, float(objective))


def _safeguarded_root(f, df, lo, hi, f_lo, f_hi, xtol, max_iter=200):
    """Root of a monotone scalar function bracketed by [lo, hi]."""
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(f_lo):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        step = None
        if df is not None:
            d = df(x)
            if d != 0.0 and np.isfinite(d):
                step = -fx / d
        cand = x + step if step is not None else None
        if cand is None or not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        if abs(cand - x) <= xtol or hi - lo <= xtol:
            return cand
        x = cand
    return x


def _inside_left(a, b):
    return a + max(4.0 * np.finfo(float).eps * abs(a), 1e-300, 1e-15 * (b - a) if a != 0.0 else 0.0)


def init_one_point(cset: ChebyshevSet, moments) -> NodeWeightState:
    """The 1-point rule exact for ``u_0`` and ``u_1``.

    Solves ``u_1(xi) / u_0(xi) = c_1 / c_0`` on [a, b] by safeguarded Newton
    (bisection when the set has no derivatives); the weight is
    ``c_0 / u_0(xi)``.
    """
    c = np.asarray(moments, dtype=float)
    if c.size < 2:
        raise ValueError("the 1-point rule needs two moments")
    a, b = cset.a, cset.b

    def f(x):
        u = cset.values(np.array([x]), 2)[:, 0]
        return u[1] / u[0] - c[1] / c[0]

    df = None
    if cset.differentiable:
        def df(x):
            u = cset.values(np.array([x]), 2)[:, 0]
            du = cset.derivatives(np.array([x]), 2)[:, 0]
            return (du[1] * u[0] - u[1] * du[0]) / u[0] ** 2

    lo = a
    try:
        f_lo = f(lo)
    except (ValueError, FloatingPointError, ZeroDivisionError):
        f_lo = np.nan
    if not np.isfinite(f_lo):
        lo = _inside_left(a, b)
        f_lo = f(lo)
    f_hi = f(b)
    if f_hi == 0.0:
        xi = b
    elif f_lo == 0.0:
        xi = lo
    elif np.sign(f_lo) == np.sign(f_hi):
        raise ContinuationError("u_1/u_0 - c_1/c_0 has no sign change on [a, b]; "
                                "the set is not a Chebyshev set for this weight",
                                phase="first", f_a=float(f_lo), f_b=float(f_hi))
    else:
        xi = _safeguarded_root(f, df, lo, b, f_lo, f_hi, 4 * np.finfo(float).eps * max(abs(a), abs(b), b - a))
    u0 = float(cset.values(np.array([xi]), 1)[0, 0])
    return NodeWeightState(xi, [xi], [c[0] / u0], CanonicalKind.LOWER_FREE, 0)


def append_endpoint(state: NodeWeightState, b: float) -> NodeWeightState:
    """Add ``b`` with weight 0 to a lower principal state, pinning it."""
    if state.kind is not CanonicalKind.LOWER_FREE:
        raise ValueError("only a lower principal state can take the endpoint")
    return NodeWeightState(state.xi, np.append(state.points, b), np.append(state.weights, 0.0),
                           CanonicalKind.UPPER_FIXED_B, state.k + 1)


def release_endpoint(state: NodeWeightState) -> NodeWeightState:
    """Turn an upper principal state (ending at b) into a free G-phase state."""
    if state.kind is not CanonicalKind.UPPER_FIXED_B:
        raise ValueError("only a pinned state can release its endpoint")
    return NodeWeightState(state.xi, state.points, state.weights, CanonicalKind.LOWER_FREE, state.k)


class _Phase:
    """One F- or G-phase: step xi down, bracket the objective root, refine it."""

    def __init__(self, state, cset, c, controls):
        self.cset = cset
        self.c = c
        self.ctl = controls
        self.which = state.objective
        self.m = state.n_moments
        self.target = c[self.m]
        self.scale = max(abs(float(self.target)), 1.0)
        self.diff = cset.differentiable
        self.wfloor = -1e-12 * max(abs(c[0]), 1.0)

    def objective(self, state):
        return solver.eval_objective(state, self.cset, self.target, self.which)

    def tangent(self, path):
        if path.tan is None and self.diff:
            path.tan = solver.tangent(path.state, self.cset)
        return path.tan

    def solve_at(self, path, xi):
        """Converged canonical state at ``xi``, predicted from ``path``."""
        base = path.state
        dxi = xi - base.xi
        z = base.unknowns()
        guess = None
        if self.diff:
            try:
                t = self.tangent(path)
                dz = np.concatenate([t.dweights, t.dpoints[base.free_points]])
                guess = base.with_unknowns(z + dz * dxi, xi)
            except SingularSystemError:
                guess = None
        elif path.prev is not None and path.prev.xi != base.xi:
            dz = (z - path.prev.unknowns()) / (base.xi - path.prev.xi)
            guess = base.with_unknowns(z + dz * dxi, xi)
        if guess is None or not solver._valid_order(guess, self.cset):
            guess = base.with_unknowns(z, xi)
        new = solver.newton_canonical(guess, self.cset, self.c, tol=self.ctl.newton_tol,
                                      max_iter=self.ctl.max_iter)
        if new.weights.min() < self.wfloor:
            raise NewtonDivergence(f"negative weight {new.weights.min():.3e} at xi={xi}")
        return new

    def accept_against(self, old, new):
        # every node moves toward a as xi decreases
        slack = 1e-12 * (self.cset.b - self.cset.a)
        return bool(np.all(new.points <= old.points + slack))


def advance_phase(state: NodeWeightState, cset: ChebyshevSet, moments, phase: str,
                  controls: Optional[Controls] = None, l: Optional[int] = None):
    """Run one phase from ``state`` (its start) down to the objective root.

    Returns ``(root_state, samples)`` where ``samples`` are the accepted
    continuation states (padded to ``l`` points) ending with the root.
    """
    ctl = controls or Controls()
    if phase != state.objective:
        raise ValueError(f"a {state.kind.value} state runs the {state.objective}-phase, not {phase}")
    c = np.asarray(moments, dtype=float)
    if c.size <= state.n_moments:
        raise ValueError(f"{phase}-phase needs {state.n_moments + 1} moments")
    a, b = cset.a, cset.b
    L = b - a
    l = l or state.points.size
    tag = f"{phase}{state.k}"
    ph = _Phase(state, cset, c, ctl)

    start = solver.newton_canonical(state, cset, c, tol=ctl.newton_tol, max_iter=ctl.max_iter)
    g0 = ph.objective(start)
    samples = [_sample(start, l, b, tag, state.k, objective=g0)]
    if abs(g0) <= ctl.objective_tol * ph.scale:
        samples[-1] = replace(samples[-1], is_breakpoint=True)
        return start, samples

    path = _Path(start)
    max_step = ctl.max_step_fraction * L
    min_step = ctl.min_step_fraction * L
    h = min((start.xi - a) / ctl.initial_step_divisor, max_step)
    while True:
        xi = path.state.xi
        h = min(h, max_step, 0.5 * (xi - a))
        if h < min_step:
            raise ContinuationError(f"{phase}-phase reached the left endpoint without a sign change",
                                    xi=xi, phase=tag, objective=ph.objective(path.state))
        try:
            new = ph.solve_at(path, xi - h)
            if not ph.accept_against(path.state, new):
                raise NewtonDivergence("a node moved the wrong way")
        except (NewtonDivergence, SingularSystemError, ValueError, FloatingPointError) as exc:
            log.debug("step %.3e at xi=%.6g rejected: %s", h, xi, exc)
            h *= 0.5
            continue
        g = ph.objective(new)
        if g == 0.0 or np.sign(g) != np.sign(g0):
            root = _refine_root(ph, path, _Path(new, prev=path.state), g0, g, tag)
            samples.append(_sample(root, l, b, tag, state.k, True, ph.objective(root)))
            return root, samples
        samples.append(_sample(new, l, b, tag, state.k, objective=g))
        path = _Path(new, prev=path.state)
        h *= ctl.growth


def _refine_root(ph, hi, lo, g0, g_lo, tag):
    """Locate the objective root between ``hi`` (start side) and ``lo``.

    Safeguarded Newton on xi: a Newton step from the better endpoint when it
    stays inside the bracket and shrinks it fast enough, otherwise
    bisection. Every trial xi costs one converged canonical solve.
    """
    ctl = ph.ctl
    L = ph.cset.b - ph.cset.a
    xtol = 1e-15 * L + 2 * np.finfo(float).eps * abs(hi.state.xi)
    gtol = ctl.objective_tol * ph.scale
    g_hi = ph.objective(hi.state)
    best = (abs(g_lo), lo.state) if abs(g_lo) < abs(g_hi) else (abs(g_hi), hi.state)
    polish = 0
    width_before = hi.state.xi - lo.state.xi
    for it in range(ctl.max_root_iter):
        near, g_near = (hi, g_hi) if abs(g_hi) < abs(g_lo) else (lo, g_lo)
        mid = 0.5 * (hi.state.xi + lo.state.xi)
        cand = mid
        if ph.diff:
            try:
                d = solver.eval_objective_derivative(near.state, ph.tangent(near), ph.cset, ph.which)
                step = -g_near / d
                newton = near.state.xi + step
                if lo.state.xi < newton < hi.state.xi:
                    cand = newton
                    if best[0] <= gtol and abs(step) <= xtol:
                        return best[1]
            except SingularSystemError:
                pass
        # force a bisection when Newton does not shrink the bracket by half
        width = hi.state.xi - lo.state.xi
        if it > 0 and it % 3 == 0 and width > 0.5 * width_before:
            cand = mid
        if it % 3 == 0:
            width_before = width
        if width <= xtol:
            break
        try:
            s = ph.solve_at(near, cand)
        except (NewtonDivergence, SingularSystemError, ValueError):
            try:
                s = ph.solve_at(hi if hi.state.xi - mid < mid - lo.state.xi else lo, mid)
            except (NewtonDivergence, SingularSystemError, ValueError) as exc:
                raise ContinuationError(f"Newton failed inside the {tag} root bracket",
                                        xi=mid, phase=tag, bracket=(lo.state.xi, hi.state.xi)) from exc
        g = ph.objective(s)
        if abs(g) < best[0]:
            best = (abs(g), s)
        if g == 0.0:
            return s
        if np.sign(g) == np.sign(g0):
            hi, g_hi = _Path(s), g
        else:
            lo, g_lo = _Path(s), g
        if best[0] <= gtol:
            polish += 1
            if polish > 5 or not ph.diff and hi.state.xi - lo.state.xi <= 1e3 * xtol:
                return best[1]
    if best[0] <= gtol:
        return best[1]
    raise ContinuationError(f"{tag} root not resolved to tolerance",
                            phase=tag, objective=best[0], bracket=(lo.state.xi, hi.state.xi))


def _rule_from_state(state, cset, c, label):
    order = state.n_moments + 1
    U = cset.values(state.points, order)
    res = (U @ state.weights - c[:order]) * solver.residual_scale(c[:order])
    cond = solver.condition_estimate(state, cset, c)
    return QuadratureRule(state.points, state.weights, label, order, res, cond, (cset.a, cset.b))


class _Reflected(ChebyshevSet):
    """The set seen through ``t -> a + b - t``; used for left-to-right runs."""

    def __init__(self, base):
        a, b = base.a, base.b
        deriv = None
        derivatives = None
        if base.differentiable:
            def deriv(j, t):
                return -np.asarray(base.deriv(j, a + b - t))

            def derivatives(t, m):
                return -base.derivatives(a + b - t, m)

        super().__init__(base.descriptor, lambda j, t: base.eval(j, a + b - t), deriv,
                         values=lambda t, m: base.values(a + b - t, m), derivatives=derivatives)


def _reflect_rule(rule):
    a, b = rule.interval
    return replace(rule, points=(a + b - rule.points)[::-1], weights=rule.weights[::-1])


def compute_rule(cset: ChebyshevSet, weight, l: int, controls: Optional[Controls] = None,
                 moments: Optional[MomentVector] = None):
    """The ``l``-point generalized Gaussian rule of ``cset`` for ``weight``.

    Returns ``(rule, all_rules, trace)``. ``all_rules`` lists every principal
    representation met on the way: Gauss rules with 1..l points interleaved
    with the upper (Radau-like) representations between them.
    """
    ctl = controls or Controls()
    if l < 1:
        raise ValueError("l must be at least 1")
    if cset.count < 2 * l:
        raise ValueError(f"an {l}-point rule needs {2 * l} basis functions, the set has {cset.count}")
    c_vec = moments if moments is not None else compute_moments(cset, weight, 2 * l, tol=ctl.moment_tol)
    c = np.asarray(c_vec, dtype=float)[: 2 * l]
    if c.size < 2 * l:
        raise ValueError(f"need {2 * l} moments")
    if ctl.direction == "left":
        # the sweep pins a, so the set must be finite there
        try:
            with np.errstate(divide="raise", invalid="raise"):
                ok = bool(np.all(np.isfinite(cset.values(np.array([cset.a]), 2 * l))))
        except (ValueError, FloatingPointError, ZeroDivisionError):
            ok = False
        if not ok:
            raise ValueError(f"direction='left' pins the endpoint a={cset.a}, where the set is singular")
    work = _Reflected(cset) if ctl.direction == "left" else cset
    a, b = work.a, work.b

    with np.errstate(divide="raise", invalid="raise", over="raise"):
        first = init_one_point(work, c)
        samples = []
        u0b = float(work.values(np.array([b]), 1)[0, 0])
        samples.append(TraceSample(b, np.full(l, b, dtype=float), np.r_[c[0] / u0b, np.zeros(l - 1)], "start", 0))
        if ctl.trace:
            n = int(np.ceil((b - first.xi) / (ctl.max_step_fraction * (b - a))))
            for xi in np.linspace(b, first.xi, n + 1)[1:-1]:
                u0 = float(work.values(np.array([xi]), 1)[0, 0])
                p = np.full(l, b, dtype=float)
                p[0] = xi
                samples.append(TraceSample(float(xi), p, np.r_[c[0] / u0, np.zeros(l - 1)], "first", 0))
        samples.append(_sample(first, l, b, "first", 0, True))
        lower, upper = [first.xi], [b]
        rules = [_rule_from_state(first, work, c, LOWER)]
        state = first
        for k in range(1, l):
            root, seg = advance_phase(append_endpoint(state, b), work, c, "F", ctl, l)
            samples.extend(seg)
            upper.append(root.xi)
            rules.append(_rule_from_state(root, work, c, UPPER))
            root, seg = advance_phase(release_endpoint(root), work, c, "G", ctl, l)
            samples.extend(seg)
            lower.append(root.xi)
            rules.append(_rule_from_state(root, work, c, LOWER))
            state = root
            log.info("k=%d: upper breakpoint %.15g, lower breakpoint %.15g", k, upper[-1], lower[-1])

    if not ctl.trace:
        samples = [s for s in samples if s.is_breakpoint or s.phase == "start"]
    bps = Breakpoints(tuple(lower), tuple(upper))
    trace = ContinuationTrace(samples, bps, (a, b), l, reflected=ctl.direction == "left")
    for r in rules:
        if r.max_residual > ctl.verify_tol:
            log.warning("%s rule with %d points has residual %.3e above %.1e",
                        r.label, r.size, r.max_residual, ctl.verify_tol)
    if ctl.direction == "left":
        rules = [_reflect_rule(r) for r in rules]
    return rules[-1], rules, trace


def record_trace(cset: ChebyshevSet, weight, l: int, controls: Optional[Controls] = None):
    """Run :func:`compute_rule` with tracing on and return only the trace."""
    ctl = replace(controls or Controls(), trace=True)
    return compute_rule(cset, weight, l, ctl)[2]
