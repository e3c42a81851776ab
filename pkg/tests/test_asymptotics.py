import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from rmtlab import asymptotics as asy
from rmtlab import exact, moments
from rmtlab.errors import InvalidArgumentError, PreconditionError
from rmtlab.logderiv import EvaluationPoint
from rmtlab.series import gen_binom


def test_integer_moment_examples():
    assert asy.integer_moment_formula(1, 10, 0.1) == pytest.approx(-90.0, rel=1e-12)
    assert asy.integer_moment_formula(2, 10, 0.1) == pytest.approx(8000.0, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        asy.integer_moment_formula(1.5, 10, 0.1)


@given(st.integers(1, 6), st.integers(1, 100), st.floats(1e-4, 2.0))
def test_integer_moment_normalises_to_leading_term(K, N, a):
    scaled = (-a / N) ** K * asy.integer_moment_formula(K, N, a)
    assert scaled == pytest.approx(1 - K * a, rel=1e-9, abs=1e-9)


@given(st.floats(0, 8), st.floats(1e-6, 0.5), st.integers(1, 1000))
def test_second_order_terms_extend_the_leading_term(K, a, N):
    diff = asy.theorem3_formula(K, a, N, m=max(3, 2 * math.floor(K) + 1)) - asy.theorem2_formula(K, a)
    expect = (K * a / (2 * N) + K * (K + 1) * a**2 / 2 - K * (K + 1) * a**2 / (2 * N)
              + a**2 * K * (3 * K - 1) / (24 * N**2))
    assert diff == pytest.approx(expect, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("K, N", [(1.5, 2), (2.5, 7), (0.5, 40)])
def test_second_order_formula_from_prefactor_and_pre_expansion(K, N):
    # prefactor x (pre-expansion) and the a-expansion agree to O(a^3)
    with mpmath.workdps(40):
        a_vals = [mpmath.mpf(10) ** -k for k in (3, 4, 5, 6)]
        res = []
        for a in a_vals:
            u = -mpmath.expm1(-a / N)
            lhs = asy.prefactor_ratio(K, a, N, u) * asy.pre_expansion_formula(K, 1 - u, N, u)
            res.append(lhs - asy.theorem3_formula(K, a, N))
        fit = asy.loglog_slope(a_vals, res)
    assert fit.slope == pytest.approx(3.0, abs=1e-2)


def test_pre_expansion_is_truncated_binomial_of_h_leading_terms():
    N, K, a = 6, 1.7, 1e-3
    p = EvaluationPoint(N, a, K)
    u = p.one_minus_s
    h1 = asy.h1_asymptotic(N, u)
    h2 = asy.h2_asymptotic(N, u)
    series = 1 + float(gen_binom(K, 1)) * h1 + float(gen_binom(K, 2)) * h2
    assert asy.pre_expansion_formula(K, p.s, N, u) == pytest.approx(series, rel=1e-13)


def test_pre_expansion_precondition():
    with pytest.raises(PreconditionError):
        asy.pre_expansion_formula(1.0, 0.5, 10)
    assert asy.pre_expansion_formula(0.0, 0.9, 1) == 1.0


def test_compare_trivial_and_infeasible():
    rep = asy.compare(1.0, "theorem2", EvaluationPoint(5, 0.1, 0.0))
    assert rep.verdict == asy.PASS and rep.residual == 0.0
    bad = asy.compare(1.0, "theorem2", EvaluationPoint(10, 5.0, 1.0))
    assert bad.verdict == asy.INDETERMINATE
    with pytest.raises(InvalidArgumentError):
        asy.compare(1.0, "no-such-formula", EvaluationPoint(5, 0.1, 1.0))
    with pytest.raises(InvalidArgumentError):
        asy.compare(1.0, "theorem2")


def test_compare_monte_carlo_leading_term():
    p = EvaluationPoint(50, 0.01, 1.5)
    est = moments.scaled_moment_mc(p, 1500, seed=4)
    rep = asy.compare(est, "theorem2")
    assert rep.verdict == asy.PASS
    assert rep.allowed == pytest.approx(5 * (0.01**2 + 0.01 / 50) + 4 * est.stderr)
    with pytest.raises(InvalidArgumentError):
        asy.compare(est, "theorem2", EvaluationPoint(50, 0.02, 1.5))


def test_compare_detects_a_wrong_value():
    p = EvaluationPoint(50, 0.01, 1.5)
    assert asy.compare(1.0 + 1e-2, "theorem2", p).verdict == asy.FAIL


def test_loglog_slope_with_mp_inputs():
    with mpmath.workdps(40):
        x = [mpmath.mpf(10) ** -k for k in range(5, 9)]
        fit = asy.loglog_slope(x, [3 * v**3 for v in x])
    assert fit.slope == pytest.approx(3.0, abs=1e-12)
    assert asy.loglog_slope([1, 2, 4, 8, 16], [1, 4, 16, 64, 256], trim_endpoints=True).slope == pytest.approx(2)
    with pytest.raises(InvalidArgumentError):
        asy.loglog_slope([1.0], [1.0])
    with pytest.raises(InvalidArgumentError):
        asy.loglog_slope([1.0, 2.0], [0.0, 1.0])


def test_compare_scan_h1_slope():
    pts = [EvaluationPoint(10, a) for a in (1e-3, 1e-4, 1e-5, 1e-6)]
    measured = [exact.h1_from_pole_split(p) for p in pts]
    reps = asy.compare_scan(measured, "h1", pts, against="one_minus_s")
    assert all(r.verdict == asy.PASS for r in reps)
    assert reps[0].slope_diag == pytest.approx(3.0, abs=0.1)
    with pytest.raises(InvalidArgumentError):
        asy.compare_scan(measured[:2], "h1", [pts[0], EvaluationPoint(11, 1e-3)])
