"""Kernel backend selection.

The compiled extension ``ggq._kernels`` is used when it imports; otherwise the
numpy fallback in ``ggq._pykernels``. Setting ``GGQ_PURE_PYTHON=1`` forces the
fallback. Callers go through :data:`kernels` at call time, so
:func:`set_backend` takes effect immediately.
"""

import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python")

kernels = _pykernels
name = "python"


def available():
    """Backends that can be selected in this installation."""
    return ("cython", "python") if _compiled is not None else ("python",)


def set_backend(which):
    global kernels, name
    if which == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        kernels, name = _compiled, "cython"
    elif which == "python":
        kernels, name = _pykernels, "python"
    else:
        raise ValueError(f"unknown backend {which!r}; choose from {BACKENDS}")


if _compiled is not None and os.environ.get("GGQ_PURE_PYTHON", "") in ("", "0"):
    set_backend("cython")
