"""Closed-form and asymptotic moment formulas, error budgets and comparisons.

Every formula accepts floats or mpmath numbers and evaluates in the type
it is given.  Budgets are the error-term magnitudes with unit constants;
:func:`compare` scales them by ``tolerance_multiplier``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError, PreconditionError
from .logderiv import EvaluationPoint
from .moments import MC_SIGMAS, MomentEstimate

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"
DEFAULT_MULTIPLIER = 5.0


def integer_moment_formula(K: int, N: int, a):
    """Exact integer moment ``(-1)^K [(N/a)^K - K N^K / a^(K-1)]`` at ``s = e^{-a/N}``."""
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise InvalidArgumentError("K must be a positive integer")
    K = int(K)
    return (-1) ** K * ((N / a) ** K - K * N**K / a ** (K - 1))


def theorem2_formula(K, a):
    """Leading behaviour ``1 - K a`` of the scaled moment."""
    return 1 - K * a


def theorem2_budget(a, N):
    return a * a + a / N


def _check_m(m, K):
    if int(m) != m or m % 2 == 0 or m < 3 or m < math.floor(K):
        raise InvalidArgumentError("m must be odd, >= 3 and >= floor(K)")


def theorem3_formula(K, a, N, m: int = 3):
    """Second-order expansion of the scaled moment in ``a`` and ``1/N``."""
    _check_m(m, K)
    return (1 - K * a + K * a / (2 * N) + K * (K + 1) * a * a / 2
            - K * (K + 1) * a * a / (2 * N) + a * a / N**2 * K * (3 * K - 1) / 24)


def theorem3_budget(a, N, m: int = 3):
    return N ** (m + 1) * a**4 + N**m * a**3


def pre_expansion_formula(K, s, N, one_minus_s=None):
    """``1 - K N u - K N u^2 + K(K+1) N^2 u^2 / 2`` with ``u = 1 - s``.

    Pass ``one_minus_s`` when it is known more accurately than ``1 - s``.
    """
    u = 1 - s if one_minus_s is None else one_minus_s
    if 2 * u * N / (1 + s) > 0.5:
        raise PreconditionError("infeasible point: 2(1-s)N/(1+s) > 1/2")
    return 1 - K * N * u - K * N * u * u + K * (K + 1) * N * N * u * u / 2


def pre_expansion_budget(u, N, m: int = 3):
    return N ** (m + 5) * u**4 + N ** (m + 3) * u**3


def h1_asymptotic(N, u):
    """Two-term expansion ``N(s-1) + N(N-1)(1-s)^2`` of h(1)."""
    return -N * u + N * (N - 1) * u * u


def h1_budget(N, u):
    return N**3 * u**3


def h2_asymptotic(N, u):
    return N * N * u * u


def prefactor_ratio(K, a, N, one_minus_s):
    """``((a/N) / (1-s))^K``: converts ``E[(1+x)^K]`` to the ``(-a/N)^K`` normalisation."""
    return (a / N / one_minus_s) ** K


# ---------------------------------------------------------------------------
# Comparison


@dataclass
class ComparisonReport:
    point: EvaluationPoint | None
    measured: float
    formula: float
    residual: float
    budget: float
    stderr: float = 0.0
    tolerance_multiplier: float = DEFAULT_MULTIPLIER
    slope_diag: float | None = None
    verdict: str = INDETERMINATE
    label: str = ""

    @property
    def allowed(self) -> float:
        return self.tolerance_multiplier * self.budget + MC_SIGMAS * self.stderr


_FORMULAS: dict[str, Callable] = {}


def _formula_theorem2(point):
    return theorem2_formula(point.K, point.a), theorem2_budget(point.a, point.N)


def _formula_theorem3(point, m=3):
    return theorem3_formula(point.K, point.a, point.N, m), theorem3_budget(point.a, point.N, m)


def _formula_pre_expansion(point, m=3):
    u = point.one_minus_s
    return pre_expansion_formula(point.K, point.s, point.N, u), pre_expansion_budget(u, point.N, m)


def _formula_h1(point):
    u = point.one_minus_s
    return h1_asymptotic(point.N, u), h1_budget(point.N, u)


_FORMULAS.update(theorem2=_formula_theorem2, theorem3=_formula_theorem3,
                 pre_expansion=_formula_pre_expansion, h1=_formula_h1)


def resolve_formula(formula_op):
    if callable(formula_op):
        return formula_op
    try:
        return _FORMULAS[formula_op]
    except KeyError:
        raise InvalidArgumentError(f"unknown formula {formula_op!r}; known: {sorted(_FORMULAS)}") from None


def compare(measured, formula_op, point: EvaluationPoint | None = None,
            tolerance_multiplier: float = DEFAULT_MULTIPLIER, label: str = "") -> ComparisonReport:
    """Residual of a measurement against a formula and its unit-constant budget.

    ``measured`` is a MomentEstimate (its point is used) or a plain number
    with ``point`` given.  ``formula_op`` is a registered name or a callable
    ``point -> (value, budget)``.
    """
    if isinstance(measured, MomentEstimate):
        if point is not None and point != measured.point:
            raise InvalidArgumentError("measurement and formula refer to different points")
        point, value, stderr = measured.point, measured.mean, measured.stderr
    else:
        value, stderr = measured, 0.0
    if point is None:
        raise InvalidArgumentError("an EvaluationPoint is required")
    if not point.feasible:
        return ComparisonReport(point, float(value), math.nan, math.nan, math.nan, stderr,
                                tolerance_multiplier, None, INDETERMINATE, label)
    if point.K == 0 and formula_op in ("theorem2", "theorem3", "pre_expansion"):
        return ComparisonReport(point, 1.0, 1.0, 0.0, 0.0, 0.0, tolerance_multiplier, None, PASS, label)
    formula, budget = resolve_formula(formula_op)(point)
    residual = abs(value - formula)
    rep = ComparisonReport(point, value, formula, residual, budget, stderr, tolerance_multiplier,
                           None, INDETERMINATE, label)
    rep.verdict = PASS if residual <= rep.allowed else FAIL
    return rep


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)


def loglog_slope(x: Sequence, y: Sequence, trim_endpoints: bool = False) -> SlopeFit:
    """Least-squares slope of ``log|y|`` against ``log x``.

    Accepts mpmath numbers; logs are taken before conversion to float so
    residuals below the float range are handled.  ``trim_endpoints`` drops
    the first and last points (only when at least five remain usable).
    """
    if len(x) != len(y) or len(x) < 2:
        raise InvalidArgumentError("need at least two matched points")
    lx = [_log(v) for v in x]
    ly = [_log(abs(v)) for v in y]
    if any(not math.isfinite(v) for v in lx + ly):
        raise InvalidArgumentError("log-log fit needs positive finite values")
    if trim_endpoints and len(lx) >= 5:
        lx, ly = lx[1:-1], ly[1:-1]
    slope, intercept = np.polyfit(lx, ly, 1)
    return SlopeFit(float(slope), float(intercept), list(x), list(y))


def _log(v):
    if isinstance(v, float | int):
        return math.log(v) if v > 0 else -math.inf
    import mpmath
    return float(mpmath.log(v)) if v > 0 else -math.inf


def compare_scan(measured: Sequence, formula_op, points: Sequence[EvaluationPoint],
                 tolerance_multiplier: float = DEFAULT_MULTIPLIER, against: str = "a",
                 label: str = "") -> list[ComparisonReport]:
    """Compare a fixed-N scan and attach the residual slope to every report.

    ``against`` selects the abscissa: ``"a"`` or ``"one_minus_s"``.
    """
    if len({p.N for p in points}) != 1:
        raise InvalidArgumentError("a slope scan needs a fixed N")
    reports = [compare(m, formula_op, p, tolerance_multiplier, label) for m, p in zip(measured, points)]
    ok = [r for r in reports if r.residual and math.isfinite(r.residual)]
    if len(ok) >= 2:
        fit = loglog_slope([getattr(r.point, against) for r in ok], [r.residual for r in ok])
        for r in reports:
            r.slope_diag = fit.slope
    return reports
