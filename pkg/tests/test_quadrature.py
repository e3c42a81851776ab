import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmtlab import kernels
from rmtlab.errors import AccuracyError, BudgetError, InvalidArgumentError
from rmtlab.quadrature import (QuadratureRule, integrate_1d, integrate_nd, nodes_weights,
                               oscillation_panels)


def test_half_angle():
    assert integrate_1d(lambda t: np.sin(t / 2) ** 2, 0, math.pi) == pytest.approx(math.pi / 2, rel=1e-14)


def test_r1_integral_N20():
    v = integrate_1d(lambda t: kernels.r1(20, t), 0, math.pi, QuadratureRule(panels=oscillation_panels(20)))
    assert v == pytest.approx(20, rel=1e-10)


def test_pole_integrand_s0999():
    s = 0.999
    v = integrate_1d(lambda t: kernels.lorentzian(s, t), 0, math.pi, QuadratureRule(pole_width=1 - s))
    assert v == pytest.approx(math.pi / (1 - s * s), rel=1e-9)


@pytest.mark.parametrize("order", [8, 16, 32])
def test_monomial_exactness(order):
    breaks = np.array([0.0, 0.5, 2.0])
    x, w = nodes_weights(breaks, order)
    for deg in range(2 * order):
        exact = (0.5 ** (deg + 1) + (2.0 ** (deg + 1) - 0.5 ** (deg + 1))) / (deg + 1)
        assert float(np.sum(w * x**deg)) == pytest.approx(exact, rel=1e-13)


def test_rule_validation():
    with pytest.raises(InvalidArgumentError):
        QuadratureRule(order=10)
    with pytest.raises(InvalidArgumentError):
        QuadratureRule(panels=0)
    with pytest.raises(InvalidArgumentError):
        integrate_1d(np.sin, 1.0, 1.0)


def test_graded_breakpoints():
    b = QuadratureRule(panels=4, pole_width=1e-6).breakpoints(0.0, math.pi)
    assert b[0] == 0.0 and b[-1] == math.pi
    assert b[1] == pytest.approx(1e-6 / 8)
    assert np.all(np.diff(b) > 0)
    ratios = b[2:12] / b[1:11]
    assert np.allclose(ratios, 2.0)


def test_nonconvergence_raises():
    # |t - 1|^0.5 has a kink; with a tiny panel cap the tolerance cannot be met.
    with pytest.raises(AccuracyError):
        integrate_1d(lambda t: np.abs(t - 1.0) ** 0.5, 0, math.pi, QuadratureRule(panels=3),
                     rtol=1e-15, atol=0, max_panels=64)


def test_error_estimate_shrinks_on_refinement():
    res = integrate_1d(lambda t: kernels.r1(30, t), 0, math.pi, QuadratureRule(panels=8), full_output=True)
    diffs = np.abs(np.diff(res.history))
    assert np.all(diffs[1:] <= diffs[:-1] * 1.01 + 1e-15)
    assert res.value == pytest.approx(30, rel=1e-11)


def test_nd_r2_N1_is_zero():
    assert abs(integrate_nd(lambda a, b: kernels.r2(1, a, b), 2, atol=1e-12)) <= 1e-10


def test_nd_r2_pair_count():
    v = integrate_nd(lambda a, b: kernels.r2(3, a, b), 2, QuadratureRule(panels=16))
    assert v == pytest.approx(6.0, rel=1e-10)


def test_nd_r3_triple_count():
    v = integrate_nd(lambda a, b, c: kernels.rn(3, np.stack(np.broadcast_arrays(a, b, c), -1)), 3,
                     QuadratureRule(panels=8))
    assert v == pytest.approx(6.0, rel=1e-9)


def test_nd_separable():
    f = lambda t: np.exp(-t) * np.cos(3 * t)
    g = lambda t: 1 + t**2
    ref = integrate_1d(f, 0, math.pi) * integrate_1d(g, 0, math.pi)
    assert integrate_nd(lambda a, b: f(a) * g(b), 2) == pytest.approx(ref, rel=1e-12)
    ref3 = ref * integrate_1d(np.sin, 0, math.pi)
    assert integrate_nd(lambda a, b, c: f(a) * g(b) * np.sin(c), 3, QuadratureRule(panels=8)) == pytest.approx(ref3, rel=1e-12)


def test_nd_budget():
    with pytest.raises(BudgetError):
        integrate_nd(lambda a, b, c: a * 0 + b * 0 + c * 0 + 1.0, 3, QuadratureRule(panels=64), max_evaluations=10**6)
    with pytest.raises(InvalidArgumentError):
        integrate_nd(lambda a: a, 1)


def test_order_independence_of_panel_sums():
    f = lambda t: kernels.r1(7, t) * np.cos(t)
    a = integrate_1d(f, 0, math.pi, QuadratureRule(order=16))
    b = integrate_1d(f, 0, math.pi, QuadratureRule(order=32))
    assert a == pytest.approx(b, rel=1e-11, abs=1e-13)


@given(st.integers(0, 12), st.floats(0.1, 3.0))
def test_polynomials_exact_property(deg, hi):
    coeff = np.arange(1, deg + 2, dtype=float)
    f = lambda t: np.polynomial.polynomial.polyval(t, coeff)
    anti = np.polynomial.polynomial.polyint(coeff)
    exact = np.polynomial.polynomial.polyval(hi, anti)
    assert integrate_1d(f, 0.0, hi, QuadratureRule(panels=1), atol=1e-300) == pytest.approx(exact, rel=1e-12)
