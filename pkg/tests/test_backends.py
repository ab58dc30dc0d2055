import os
import subprocess
import sys

import numpy as np
import pytest

from ggq import _backend, _pykernels
from ggq.basis import WeightSpec, log_set
from ggq.continuation import compute_rule

compiled = pytest.mark.skipif("cython" not in _backend.available(), reason="compiled kernels not built")


@compiled
def test_cheb_vander_agrees():
    from ggq import _kernels
    x = np.linspace(-1, 1, 17)
    for a, b in zip(_kernels.cheb_vander(x, 12), _pykernels.cheb_vander(x, 12)):
        np.testing.assert_allclose(a, b, rtol=1e-15, atol=1e-15)


@compiled
def test_lu_agrees():
    from ggq import _kernels
    rng = np.random.default_rng(0)
    A = rng.standard_normal((9, 9))
    b = rng.standard_normal(9)
    f1, f2 = _kernels.lu_factor(A), _pykernels.lu_factor(A)
    np.testing.assert_allclose(f1[0], f2[0], rtol=1e-14, atol=1e-15)
    np.testing.assert_array_equal(f1[1], f2[1])
    for trans in (False, True):
        np.testing.assert_allclose(_kernels.lu_solve(*f1[:2], b, trans), _pykernels.lu_solve(*f2[:2], b, trans),
                                   rtol=1e-13)


def test_rule_is_backend_independent():
    rules = {}
    start = _backend.name
    try:
        for be in _backend.available():
            _backend.set_backend(be)
            rules[be] = compute_rule(log_set(4), WeightSpec.unit(), 4)[0]
    finally:
        _backend.set_backend(start)
    ref = rules["python"]
    assert ref.max_residual <= 1e-11
    for r in rules.values():
        np.testing.assert_allclose(r.points, ref.points, rtol=0, atol=1e-11)
        np.testing.assert_allclose(r.weights, ref.weights, rtol=0, atol=1e-11)


def test_pure_python_env_switch():
    code = "import ggq; print(ggq.active_backend())"
    env = {**os.environ, "GGQ_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env).stdout.strip()
    assert out == "python"


def test_set_backend_validation():
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")
