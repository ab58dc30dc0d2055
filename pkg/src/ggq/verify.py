"""Invariant checks for computed rules and continuation traces.

Every check returns a :class:`CheckResult` carrying a pass flag and the
worst-case metric behind it; :func:`certify` bundles them.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .continuation import LOWER, UPPER, ContinuationTrace, QuadratureRule
from .solver import residual_scale

log = logging.getLogger(__name__)

_PHASE_K = re.compile(r"^([FG])(\d+)$")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    metric: float

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "metric": float(self.metric)}


@dataclass(frozen=True)
class Certificate:
    checks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "checks", tuple(self.checks))

    @property
    def overall(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {"overall": self.overall, "checks": [c.to_dict() for c in self.checks]}

    def report(self):
        """Plain-text report, one line per check."""
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<28s} {c.metric:.3e}" for c in self.checks]
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def check_exactness(rule: QuadratureRule, cset, moments, tol: float = 1e-11) -> CheckResult:
    """Scaled moment residual over every moment in ``moments``."""
    c = np.asarray(moments, dtype=float)
    m = c.size
    if m > cset.count:
        raise ValueError(f"the set has {cset.count} functions, {m} moments given")
    r = cset.values(rule.points, m) @ rule.weights - c
    worst = float(np.max(np.abs(r) * residual_scale(c))) if m else 0.0
    return CheckResult("exactness", bool(worst <= tol), worst)


def check_positivity_interior(rule: QuadratureRule) -> CheckResult:
    """Positive weights; a lower principal rule also keeps its points off the endpoints.

    The metric is the smallest weight, or minus the distance by which a point
    touches or leaves the interval, whichever is worse.
    """
    a, b = rule.interval
    p, w = rule.points, rule.weights
    metric = float(w.min()) if w.size else 0.0
    if rule.label == LOWER:
        gap = float(min((p - a).min(), (b - p).min())) if p.size else 1.0
        ok_points = gap > 0
    else:
        gap = float(min((p - a).min(), (b - p).min())) if p.size else 0.0
        ok_points = gap >= 0
    if not ok_points:
        metric = min(metric, gap if gap < 0 else -0.0)
    return CheckResult("positivity_interior", bool(np.all(w > 0) and ok_points), metric)


def check_interlacing(rule_k: QuadratureRule, rule_k1: QuadratureRule) -> CheckResult:
    """Strict interlacing ``q_1 < p_1 < q_2 < ... < p_k < q_{k+1}``.

    A point shared with ``rule_k1`` at an interval endpoint is exempt. The
    metric is the smallest separation found (negative when out of order).
    """
    p = np.asarray(rule_k.points, dtype=float)
    q = np.asarray(rule_k1.points, dtype=float)
    if q.size != p.size + 1:
        raise ValueError(f"expected {p.size + 1} points in the larger rule, got {q.size}")
    ends = rule_k1.interval
    worst = np.inf
    for i, x in enumerate(p):
        left, right = x - q[i], q[i + 1] - x
        if left == 0 and x in ends:
            left = np.inf
        if right == 0 and x in ends:
            right = np.inf
        worst = min(worst, left, right)
    if not p.size:
        worst = 0.0
    passed = bool(worst > 0)
    if passed and worst <= 1e-14 * max(1.0, abs(ends[1] - ends[0])):
        log.warning("interlacing is near-degenerate: separation %.3e", worst)
    return CheckResult("interlacing", passed or not p.size, float(worst))


def _active(sample):
    m = _PHASE_K.match(sample.phase)
    return sample.k + 1 if m else 1


def check_trace(trace: ContinuationTrace, slack: float = 1e-12) -> CheckResult:
    """Monotone node paths, ``x_1 = xi``, ordered points and an increasing breakpoint chain.

    Within each F/G phase the recorded objective values must also be
    strictly monotone. The metric is the worst violation (0 when clean).
    """
    samples = trace.samples
    a, b = trace.interval
    tol = slack * max(1.0, b - a)
    worst = 0.0
    for prev, cur in zip(samples[:-1], samples[1:]):
        if cur.xi > prev.xi + tol:
            worst = max(worst, cur.xi - prev.xi)
        worst = max(worst, float(np.max(cur.points - prev.points)) - tol, 0.0) if cur.points.size else worst
    for s in samples:
        worst = max(worst, abs(s.points[0] - s.xi))
        n = _active(s)
        steps = np.diff(s.points[:n])
        if steps.size and steps.min() <= 0:
            worst = max(worst, -float(steps.min()) + tol)
        if s.points.size and (s.points.min() < a - tol or s.points.max() > b + tol):
            worst = max(worst, tol + 1.0)
    chain = np.asarray(trace.breakpoints.chain(), dtype=float)
    if chain.size > 1 and np.diff(chain).min() <= 0:
        worst = max(worst, -float(np.diff(chain).min()) + tol)
    if chain.size and (chain[0] <= a or chain[-1] != b):
        worst = max(worst, tol + 1.0)
    by_phase = {}
    for s in samples:
        if _PHASE_K.match(s.phase) and np.isfinite(s.objective):
            by_phase.setdefault(s.phase, []).append(s.objective)
    for vals in by_phase.values():
        d = np.diff(vals)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            worst = max(worst, float(np.max(np.abs(d[np.sign(d) != np.sign(d.sum())]), initial=0.0)) + tol)
    return CheckResult("trace", bool(worst <= tol), worst)


def certify(rule: QuadratureRule, cset, moments, all_rules=None, trace=None,
            tol: float = 1e-11) -> Certificate:
    """Run every applicable check on ``rule`` and, if given, its companions."""
    c = np.asarray(moments, dtype=float)
    checks = [check_exactness(rule, cset, c[: rule.order], tol), check_positivity_interior(rule)]
    if all_rules:
        for r in all_rules:
            ex = check_exactness(r, cset, c[: r.order], tol)
            pos = check_positivity_interior(r)
            checks.append(CheckResult(f"exactness[{r.label[0]}{r.size}]", ex.passed, ex.metric))
            checks.append(CheckResult(f"positivity[{r.label[0]}{r.size}]", pos.passed, pos.metric))
        gauss = [r for r in all_rules if r.label == LOWER]
        for r0, r1 in zip(gauss[:-1], gauss[1:]):
            il = check_interlacing(r0, r1)
            checks.append(CheckResult(f"interlacing[{r0.size}|{r1.size}]", il.passed, il.metric))
    if trace is not None:
        checks.append(check_trace(trace))
    return Certificate(checks)


__all__ = ["CheckResult", "Certificate", "check_exactness", "check_positivity_interior",
           "check_interlacing", "check_trace", "certify", "LOWER", "UPPER"]
