"""Command-line front end.

    ggq compute --family legendre --interval -1 1 --l 5 -o rule.json
    ggq trace   --family cheb-log --l 5 -o trace.csv
    ggq verify  rule.json [other.json]
    ggq demo    --k 10 20 --K 1 2

Exit status: 0 success (and certificate pass), 1 computational failure or
failed certificate, 2 usage or format error. ``GGQ_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .basis import (Family, QuadratureError, WeightKind, WeightSpec, laguerre_set, legendre_set,
                    log_set, make_set, moments)
from .continuation import ContinuationError, Controls, compute_rule
from .densesolve import SingularSystemError
from .formats import FormatError, RuleDocument, breakpoint_block, trace_csv
from .solver import NewtonDivergence
from .special import DEMO_FREQUENCIES, DEMO_POINT_COUNTS, error_table
from .verify import Certificate, certify, check_exactness, check_interlacing, check_positivity_interior

log = logging.getLogger("ggq")

FAMILIES = ("legendre", "cheb-log", "laguerre", "laguerre-log")
_DEFAULT_INTERVAL = {"legendre": (-1.0, 1.0), "cheb-log": (0.0, 1.0)}

_FAILURES = (ContinuationError, NewtonDivergence, SingularSystemError, QuadratureError, FloatingPointError)


class UsageError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("GGQ_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def build_set(family, l, interval=None):
    """The built-in set and weight behind a CLI family name."""
    if family in ("laguerre", "laguerre-log"):
        if interval is not None:
            raise UsageError(f"{family} lives on the half-line [0, inf); --interval does not apply")
        return laguerre_set(l, log=family == "laguerre-log"), WeightSpec.exp_decay()
    a, b = interval if interval is not None else _DEFAULT_INTERVAL[family]
    if not a < b:
        raise UsageError(f"empty interval [{a}, {b}]")
    if family == "legendre":
        return legendre_set(l, a, b), WeightSpec.unit()
    return log_set(l, a, b), WeightSpec.unit()


def _controls(args, trace):
    return Controls(verify_tol=args.tol, direction=args.direction, trace=trace)


def _run(args, trace):
    cset, weight = build_set(args.family, args.l, args.interval)
    c = moments(cset, weight, 2 * args.l)
    rule, rules, tr = compute_rule(cset, weight, args.l, _controls(args, trace), moments=c)
    return cset, weight, c, rule, rules, tr


def _summary(rule, cert):
    lines = [f"{'i':>3s}  {'point':>24s}  {'weight':>24s}"]
    for i, (x, w) in enumerate(zip(rule.points, rule.weights), 1):
        lines.append(f"{i:3d}  {x:24.17g}  {w:24.17g}")
    lines.append(f"max scaled residual {rule.max_residual:.3e}, condition estimate {rule.condition_estimate:.3e}")
    lines.append(cert.report())
    return "\n".join(lines)


def cmd_compute(args):
    cset, weight, c, rule, rules, tr = _run(args, trace=args.trace)
    cert = certify(rule, cset, c, rules, tr if args.trace else None, tol=args.tol)
    if args.output:
        RuleDocument(rule, cset.descriptor, weight.kind, tr.breakpoints).write(args.output)
    print(_summary(rule, cert))
    return 0 if cert.overall else 1


def cmd_trace(args):
    cset, weight, c, rule, rules, tr = _run(args, trace=True)
    cert = certify(rule, cset, c, rules, tr, tol=args.tol)
    text, side = trace_csv(tr), breakpoint_block(tr)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        with open(args.output + ".breakpoints.txt", "w") as fh:
            fh.write(side)
        print(side, end="")
    else:
        sys.stdout.write(text)
        sys.stdout.write(side)
    print(cert.report(), file=sys.stderr)
    return 0 if cert.overall else 1


def _load(path):
    try:
        doc = RuleDocument.read(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if doc.basis.family is Family.CUSTOM or doc.weight is WeightKind.CUSTOM:
        raise UsageError("custom sets and weights cannot be rebuilt from a document")
    return doc


def cmd_verify(args):
    doc = _load(args.rule)
    cset = make_set(doc.basis)
    c = moments(cset, WeightSpec(doc.weight), doc.rule.order)
    checks = [check_exactness(doc.rule, cset, c, args.tol), check_positivity_interior(doc.rule)]
    if args.pair:
        other = _load(args.pair)
        small, big = sorted([doc.rule, other.rule], key=lambda r: r.size)
        if big.size != small.size + 1:
            raise UsageError("interlacing needs rules with k and k+1 points")
        checks.append(check_interlacing(small, big))
    cert = Certificate(checks)
    print(cert.report())
    return 0 if cert.overall else 1


def cmd_demo(args):
    for K in args.K:
        if not 1 <= K <= 4:
            raise UsageError("K must lie in 1..4")
    for k in args.k:
        if k < 10:
            raise UsageError("k must be at least 10")
    table = error_table(tuple(args.k), tuple(args.K))
    print("K \\ k " + "".join(f"{k:>10g}" for k in args.k))
    for K, row in zip(args.K, table):
        print(f"{K:<6d}" + "".join(f"{e:10.1e}" for e in row))
    return 0


def _interval(values):
    return tuple(float(v) for v in values)


def build_parser():
    p = argparse.ArgumentParser(prog="ggq", description="Generalized Gaussian quadrature for Chebyshev sets.")
    sub = p.add_subparsers(dest="command", required=True)

    def rule_args(sp):
        sp.add_argument("--family", choices=FAMILIES, default="legendre")
        sp.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"), default=None)
        sp.add_argument("--l", type=int, required=True, help="number of points")
        sp.add_argument("--tol", type=float, default=1e-11, help="certificate tolerance")
        sp.add_argument("--direction", choices=("right", "left"), default="right")
        sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("compute", help="compute a rule and certify it")
    rule_args(sp)
    sp.add_argument("--trace", action="store_true", help="also run the trace checks")
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("trace", help="write the continuation trace as CSV")
    rule_args(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("verify", help="certify a stored rule")
    sp.add_argument("rule")
    sp.add_argument("pair", nargs="?", default=None)
    sp.add_argument("--tol", type=float, default=1e-11)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("demo", help="steepest-descent error table")
    sp.add_argument("--k", type=float, nargs="+", default=list(DEMO_FREQUENCIES))
    sp.add_argument("--K", type=int, nargs="+", default=list(DEMO_POINT_COUNTS))
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "l", 1) is not None and getattr(args, "l", 1) < 1:
        parser.error("--l must be at least 1")
    if getattr(args, "interval", None) is not None:
        args.interval = _interval(args.interval)
    try:
        return args.func(args)
    except (UsageError, FormatError) as exc:
        print(f"ggq: error: {exc}", file=sys.stderr)
        return 2
    except _FAILURES as exc:
        diag = getattr(exc, "diagnostics", {})
        print(f"ggq: computation failed: {exc}", file=sys.stderr)
        if diag:
            print(json.dumps({k: (v if isinstance(v, (int, float, str)) else repr(v)) for k, v in diag.items()}),
                  file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ggq: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
