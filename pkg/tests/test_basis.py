import math

import mpmath as mp
import numpy as np
import pytest

from ggq.basis import (BasisDescriptor, Family, Interval, MomentSource, WeightSpec, graded_quadrature,
                       laguerre_log_moment, laguerre_set, legendre_set, log_set, make_set, moments)

EULER = 0.57721566490153286


def test_chebyshev_eval_examples():
    s = make_set(BasisDescriptor(Family.CHEBYSHEV_POLY, 4, Interval(-1, 1)))
    assert s.eval(2, 0.5) == pytest.approx(-0.5, abs=1e-15)
    s01 = make_set(BasisDescriptor(Family.CHEBYSHEV_POLY, 4, Interval(0, 1)))
    assert s01.eval(0, 0.3) == 1.0


def test_log_family_first_log_element_vanishes_at_one():
    s = log_set(5)
    assert s.eval(5, 1.0) == 0.0
    with pytest.raises(ValueError):
        s.eval(5, 0.0)


def test_descriptor_validation():
    with pytest.raises(ValueError):
        BasisDescriptor(Family.CHEBYSHEV_POLY_PLUS_LOG, 5, Interval(0, 1))
    with pytest.raises(ValueError):
        BasisDescriptor(Family.CHEBYSHEV_POLY, 1, Interval(0, 1))
    with pytest.raises(ValueError):
        BasisDescriptor("NoSuchFamily", 4, Interval(0, 1))
    with pytest.raises(ValueError):
        Interval(1, 0)
    with pytest.raises(ValueError):
        make_set(BasisDescriptor(Family.CUSTOM, 2, Interval(0, 1)))


def test_descriptor_round_trip():
    d = BasisDescriptor(Family.LAGUERRE_PLUS_LOG, 8, Interval.truncated_half_line(8), {"poly": "monomial"})
    assert BasisDescriptor.from_dict(d.to_dict()) == d
    assert d.interval.b == 2 * 8 + 45


def test_custom_family_without_derivatives():
    d = BasisDescriptor(Family.CUSTOM, 2, Interval(0, 1))
    s = make_set(d, eval=lambda j, t: np.asarray(t, dtype=float) ** j)
    assert not s.differentiable
    np.testing.assert_allclose(s.values(np.array([0.5, 2.0]), 2), [[1, 1], [0.5, 2.0]])


def test_derivatives_match_finite_differences():
    for s in (legendre_set(4, 0, 2), log_set(3), laguerre_set(3, log=True)):
        t = np.linspace(s.a, s.b, 9)[1:-1]
        h = 1e-6
        fd = (s.values(t + h) - s.values(t - h)) / (2 * h)
        np.testing.assert_allclose(s.derivatives(t), fd, rtol=1e-6, atol=1e-6)


def test_unit_chebyshev_moments():
    c = moments(legendre_set(2), WeightSpec.unit(), 3)
    np.testing.assert_allclose(c.values, [2, 0, -2 / 3], atol=1e-15)
    assert c.source is MomentSource.ANALYTIC


def test_x_log_x_moment():
    s = log_set(2, poly="monomial")  # 1, x, log x, x log x
    assert moments(s, WeightSpec.unit())[3] == pytest.approx(-0.25, abs=1e-15)
    q = moments(s, WeightSpec.unit(), method="quadrature")
    assert q.source is MomentSource.ADAPTIVE_QUADRATURE
    assert q[3] == pytest.approx(-0.25, abs=1e-14)


def test_laguerre_log_zeroth_moment_is_minus_gamma():
    s = laguerre_set(1, log=True)  # 1, log x
    oracle = float(mp.quad(lambda x: mp.log(x) * mp.exp(-x), [0, 1, mp.inf]))
    assert moments(s, WeightSpec.exp_decay())[1] == pytest.approx(oracle, abs=1e-14)
    assert oracle == pytest.approx(-EULER, abs=1e-15)


@pytest.mark.parametrize("j,expected", [(0, -0.5772156649), (1, 0.4227843351), (2, 1.8455686702)])
def test_laguerre_log_moment_values(j, expected):
    assert laguerre_log_moment(j) == pytest.approx(expected, abs=1e-10)
    oracle = float(mp.quad(lambda x: x ** j * mp.log(x) * mp.exp(-x), [0, 1, mp.inf]))
    assert laguerre_log_moment(j) == pytest.approx(oracle, rel=1e-14)


def test_laguerre_log_moment_overflow():
    with pytest.raises(OverflowError):
        laguerre_log_moment(200)
    with pytest.raises(ValueError):
        laguerre_log_moment(-1)


def test_laguerre_monomial_moments_are_factorials():
    c = moments(laguerre_set(8), WeightSpec.exp_decay())
    for j in range(16):
        assert c[j] == pytest.approx(math.factorial(j), rel=1e-13)


@pytest.mark.parametrize("cset", [legendre_set(4, -1, 3), log_set(4), log_set(3, 0, 2, poly="monomial")],
                         ids=["cheb", "cheb-log", "mono-log"])
def test_analytic_and_quadrature_moments_agree(cset):
    w = WeightSpec.unit()
    q = moments(cset, w, method="quadrature").values
    exact = np.array([float(mp.quad(lambda t: cset.eval(j, float(t)), [cset.a, cset.b]))
                      for j in range(cset.count)])
    np.testing.assert_allclose(q, exact, atol=1e-14 * np.max(np.abs(exact)))
    if cset.descriptor.params.get("poly") == "monomial" or not cset.descriptor.family.has_log:
        np.testing.assert_allclose(moments(cset, w, method="analytic").values, exact, atol=1e-14)
    else:
        with pytest.raises(ValueError):
            moments(cset, w, method="analytic")


def test_laguerre_quadrature_moments_agree_with_closed_forms():
    s = laguerre_set(3, log=True)
    a = moments(s, WeightSpec.exp_decay()).values
    q = moments(s, WeightSpec.exp_decay(), method="quadrature").values
    np.testing.assert_allclose(q, a, atol=1e-13 * np.max(np.abs(a)))


def test_custom_weight_moments():
    s = legendre_set(2, 0, 1)
    c = moments(s, WeightSpec.custom(lambda t: 2 * t))
    assert c[0] == pytest.approx(1.0, abs=1e-14)
    assert c[1] == pytest.approx(1 / 3, abs=1e-14)  # int 2t (2t - 1) dt


def test_moment_argument_checks():
    s = legendre_set(2)
    with pytest.raises(ValueError):
        moments(s, WeightSpec.unit(), 5)
    with pytest.raises(ValueError):
        moments(s, WeightSpec.unit(), tol=0)
    with pytest.raises(ValueError):
        moments(s, WeightSpec.unit(), method="magic")


def test_graded_quadrature_log_singularity():
    val = graded_quadrature(lambda t: np.log(t)[None, :], 0.0, 1.0)
    assert val[0] == pytest.approx(-1.0, abs=1e-14)


def test_chebyshev_property_two_points():
    rng = np.random.default_rng(3)
    for s in (legendre_set(2), log_set(2), laguerre_set(2), laguerre_set(2, log=True)):
        for _ in range(20):
            t = np.sort(rng.uniform(s.a, s.b, 2))
            if t[0] == t[1] or t[0] <= s.a:
                continue
            assert abs(np.linalg.det(s.values(t, 2))) > 0
