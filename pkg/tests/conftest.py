import json
import os

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from ggq import _backend

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def golub_welsch_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre nodes and weights from the Jacobi matrix eigenproblem."""
    k = np.arange(1, n)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    x, V = eigh_tridiagonal(np.zeros(n), off)
    w = 2.0 * V[0] ** 2
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def golub_welsch_laguerre(n):
    k = np.arange(1, n)
    x, V = eigh_tridiagonal(2.0 * np.arange(n) + 1.0, -k.astype(float))
    return x, V[0] ** 2


def table1_reference():
    with open(os.path.join(FIXTURES, "table1_reference.json")) as fh:
        d = json.load(fh)
    return {int(k): complex(float(r), float(i)) for k, (r, i) in d["values"].items()}


@pytest.fixture(params=["cython", "python"])
def backend(request):
    if request.param not in _backend.available():
        pytest.skip("compiled kernels not built")
    old = _backend.name
    _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(old)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {n}: {title} -- {detail}")
