import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmtlab.errors import DomainError, InvalidArgumentError
from rmtlab.series import gen_binom, poly_basis_coeffs, taylor_remainder_constant, taylor_truncation


def test_gen_binom_examples():
    assert gen_binom(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert gen_binom(3, 2) == 3
    assert gen_binom(2.5, 0) == 1
    for n in range(4, 9):
        assert gen_binom(3, n) == 0
    assert gen_binom(1.5, 3) == pytest.approx(1.5 * 0.5 * -0.5 / 6)
    with pytest.raises(InvalidArgumentError):
        gen_binom(1.0, -1)


def test_gen_binom_mpmath():
    import mpmath
    v = gen_binom(mpmath.mpf("1.5"), 3)
    assert isinstance(v, mpmath.mpf)
    assert float(v) == pytest.approx(-0.0625)


def test_poly_basis_examples():
    assert poly_basis_coeffs(1) == [-1, 1]
    assert poly_basis_coeffs(2) == [1, -2, 1]
    x = 0.37
    rec = sum(c * (1 + x) ** k for k, c in enumerate(poly_basis_coeffs(7)))
    assert abs(rec - x**7) <= 1e-12
    with pytest.raises(InvalidArgumentError):
        poly_basis_coeffs(65)


def test_poly_basis_identities_exact():
    for n in range(65):
        c = poly_basis_coeffs(n)
        assert all(isinstance(v, int) for v in c)
        assert sum(c) == (1 if n == 0 else 0)
        assert sum(k * v for k, v in enumerate(c)) == (1 if n == 1 else 0)


def test_taylor_integer_case_exact():
    x = np.linspace(-0.5, 10, 200)
    assert np.allclose(taylor_truncation(x, 2, 3), (1 + x) ** 2, rtol=1e-15)


def test_taylor_domain():
    with pytest.raises(DomainError):
        taylor_truncation(-0.6, 1.5, 3)
    assert taylor_truncation(0.0, 1.5, 3) == 1.0
    with pytest.raises(InvalidArgumentError):
        taylor_remainder_constant(2.7, 1)


@pytest.mark.parametrize("K", [0.5, 1.5, 2.7])
@pytest.mark.parametrize("m", [3, 5])
def test_taylor_remainder_bound_grid(K, m):
    x = np.linspace(-0.5, 10, 5001)
    exact = (1 + x) ** K
    rem = np.abs(exact - taylor_truncation(x, K, m))
    bound = taylor_remainder_constant(K, m) * np.abs(x) ** (m + 1)
    assert np.all(rem <= bound + 1e-14 * np.maximum(exact, 1) * (m + 2))


@given(st.floats(-0.5, 10.0), st.floats(0.1, 4.9), st.sampled_from([5, 7]))
def test_taylor_remainder_property(x, K, m):
    exact = (1 + x) ** K
    rem = abs(exact - taylor_truncation(x, K, m))
    assert rem <= taylor_remainder_constant(K, m) * abs(x) ** (m + 1) + 1e-13 * max(exact, 1) * (m + 2)


@given(st.integers(0, 30), st.fractions(min_value=-5, max_value=5, max_denominator=9))
def test_gen_binom_recurrence(n, alpha):
    # Pascal's rule holds for generalised binomials.
    assert gen_binom(alpha + 1, n + 1) == gen_binom(alpha, n + 1) + gen_binom(alpha, n)
