"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the Chebyshev recurrence, the LU factor/solve pair and a full
compute_rule run on each available backend, and reports the speedup.
"""

import argparse
import timeit

import numpy as np

from ggq import _backend
from ggq.basis import WeightSpec, legendre_set, log_set
from ggq.continuation import compute_rule


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 12)
    A = rng.standard_normal((16, 16)) + 4 * np.eye(16)
    b = rng.standard_normal(16)
    leg, logs = legendre_set(8), log_set(5)

    def lu():
        k = _backend.kernels
        lu_, perm, _ = k.lu_factor(A)
        k.lu_solve(lu_, perm, b, False)

    return {
        "cheb_vander(12 pts, 20 fns)": lambda: _backend.kernels.cheb_vander(x, 20),
        "lu factor+solve 16x16": lu,
        "compute_rule legendre l=8": lambda: compute_rule(leg, WeightSpec.unit(), 8),
        "compute_rule log l=5": lambda: compute_rule(logs, WeightSpec.unit(), 5),
    }


def measure(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    best = min(timeit.Timer(fn).repeat(repeat=repeat, number=n))
    return best / n


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = ["python"] + (["cython"] if "cython" in _backend.available() else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the pure-Python backend only")
    start = _backend.name
    results = {}
    try:
        for be in backends:
            _backend.set_backend(be)
            for name, fn in cases().items():
                results[(name, be)] = measure(fn, args.repeat)
    finally:
        _backend.set_backend(start)
    print(f"{'case':<30s}" + "".join(f"{be:>14s}" for be in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name in cases():
        row = f"{name:<30s}" + "".join(f"{results[(name, be)] * 1e6:12.1f}us" for be in backends)
        if len(backends) > 1:
            row += f"   {results[(name, 'python')] / results[(name, 'cython')]:6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
