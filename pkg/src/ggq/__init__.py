"""Generalized Gaussian quadrature for complete Chebyshev sets by continuation."""

from ._backend import available as available_backends, set_backend
from .basis import (BasisDescriptor, ChebyshevSet, Family, Interval, MomentVector, QuadratureError,
                    WeightSpec, laguerre_set, legendre_set, log_set, make_set, moments)
from .continuation import (Breakpoints, ContinuationError, ContinuationTrace, Controls, QuadratureRule,
                           compute_rule, record_trace)
from .densesolve import SingularSystemError
from .solver import NewtonDivergence
from .verify import Certificate, certify



def active_backend():
    """Name of the kernel backend in use, ``"cython"`` or ``"python"``."""
    from . import _backend
    return _backend.name


__all__ = [
    "active_backend", "available_backends", "set_backend", "BasisDescriptor", "ChebyshevSet", "Family", "Interval", "MomentVector",
    "QuadratureError", "WeightSpec", "laguerre_set", "legendre_set", "log_set", "make_set",
    "moments", "Breakpoints", "ContinuationError", "ContinuationTrace", "Controls",
    "QuadratureRule", "compute_rule", "record_trace", "SingularSystemError", "NewtonDivergence",
    "Certificate", "certify",
]
