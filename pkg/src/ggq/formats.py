"""On-disk formats: JSON rule documents and CSV continuation traces."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import BasisDescriptor, WeightKind
from .continuation import LOWER, UPPER, Breakpoints, ContinuationTrace, QuadratureRule

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """A document is malformed or of an unsupported version."""


def _num(x):
    # 17 significant digits always round-trip a double
    return float(format(float(x), ".17g"))


def _nums(a):
    return [_num(v) for v in np.asarray(a, dtype=float)]


@dataclass(frozen=True)
class RuleDocument:
    rule: QuadratureRule
    basis: BasisDescriptor
    weight: WeightKind
    breakpoints: Optional[Breakpoints] = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        r = self.rule
        return {
            "schema_version": self.schema_version,
            "basis": self.basis.to_dict(),
            "weight": {"kind": WeightKind(self.weight).value, "params": {}},
            "points": _nums(r.points),
            "weights": _nums(r.weights),
            "label": r.label,
            "order": int(r.order),
            "residuals": _nums(r.residuals),
            "condition_estimate": _num(r.condition_estimate) if np.isfinite(r.condition_estimate) else None,
            "breakpoints": self.breakpoints.to_dict() if self.breakpoints else None,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        try:
            version = int(d["schema_version"])
            if version != SCHEMA_VERSION:
                raise FormatError(f"unsupported schema_version {version}")
            basis = BasisDescriptor.from_dict(d["basis"])
            weight = WeightKind(d["weight"]["kind"])
            points = np.array(d["points"], dtype=float)
            weights = np.array(d["weights"], dtype=float)
            if points.ndim != 1 or points.shape != weights.shape:
                raise FormatError("points and weights must be equal-length lists")
            label = d["label"]
            if label not in (LOWER, UPPER):
                raise FormatError(f"unknown label {label!r}")
            cond = d.get("condition_estimate")
            rule = QuadratureRule(points, weights, label, int(d.get("order", 2 * points.size)),
                                  np.array(d.get("residuals", []), dtype=float),
                                  float("inf") if cond is None else float(cond),
                                  (basis.interval.a, basis.interval.b))
            bp = d.get("breakpoints")
            return cls(rule, basis, weight, Breakpoints.from_dict(bp) if bp else None, version)
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed rule document: {exc}") from exc

    @classmethod
    def loads(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise FormatError("a rule document is a JSON object")
        return cls.from_dict(d)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps() + "\n")

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            return cls.loads(fh.read())


def trace_csv(trace: ContinuationTrace) -> str:
    """CSV with columns xi, x_1..x_l, w_1..w_l, phase, is_breakpoint, objective."""
    l = trace.l
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi"] + [f"x_{i + 1}" for i in range(l)] + [f"w_{i + 1}" for i in range(l)]
               + ["phase", "is_breakpoint", "objective"])
    for s in trace.samples:
        w.writerow([format(s.xi, ".17g")] + [format(v, ".17g") for v in s.points]
                   + [format(v, ".17g") for v in s.weights]
                   + [s.phase, int(s.is_breakpoint), format(s.objective, ".17g")])
    return buf.getvalue()


def breakpoint_block(trace: ContinuationTrace) -> str:
    """Sidecar text: the critical values in increasing order, then the anchor b."""
    bp = trace.breakpoints
    l = len(bp.lower)
    lines = [f"# breakpoints l={l} interval=[{trace.interval[0]!r}, {trace.interval[1]!r}]"
             + (" reflected" if trace.reflected else "")]
    names = []
    for i in range(l, 0, -1):
        names.append((f"lower_{i}", bp.lower[i - 1]))
        if i > 1:
            names.append((f"upper_{i - 1}", bp.upper[i - 1]))
    for name, v in names:
        lines.append(f"{name} {v:.17g}")
    lines.append(f"anchor upper_0 {bp.upper[0]:.17g}")
    return "\n".join(lines) + "\n"


def read_breakpoint_block(text):
    """Parse :func:`breakpoint_block` output back into ``(critical values, anchor)``."""
    vals, anchor = [], None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "anchor":
            anchor = float(parts[-1])
        else:
            vals.append(float(parts[-1]))
    return vals, anchor


def read_trace_csv(text):
    """Rows of a trace CSV as dictionaries with floats where numeric."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        out = {}
        for key, v in row.items():
            if key == "phase":
                out[key] = v
            elif key == "is_breakpoint":
                out[key] = bool(int(v))
            else:
                out[key] = float(v)
        rows.append(out)
    return rows
