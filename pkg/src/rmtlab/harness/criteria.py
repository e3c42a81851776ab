"""The acceptance criteria, one function each.

Each criterion returns a :class:`CriterionResult` holding its result rows.
Rows carry no wall-clock data so that the tables are byte-reproducible
for a fixed ``(seed, workers)``; timings are kept on the result object.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .. import asymptotics as asy
from .. import exact, kernels, moments
from ..ensemble import eigenangles_of, mcmc_angle_draws, sample_haar_so
from ..logderiv import EvaluationPoint, log_deriv_from_angles, log_deriv_from_matrix, scaled_ratio_bounds, scaled_ratio_x
from ..quadrature import QuadratureRule, integrate_1d
from ..rng import RngStream
from ..series import gen_binom, poly_basis_coeffs, taylor_remainder_constant, taylor_truncation
from .io import ResultRow

PASS, FAIL = asy.PASS, asy.FAIL
# Slack on "slope >= 3": the a^4 correction pulls a finite-a fit a few
# parts in 1e6 below the asymptotic exponent.
SLOPE_FIT_TOL = 1e-3
MP_DPS = 40
QUAD_SLACK = 1e-10


def derived_seed(seed: int, tag: int) -> int:
    """Independent 64-bit seed for sub-experiment ``tag``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class CriterionResult:
    cid: int
    title: str
    claim: str
    rows: list = field(default_factory=list)
    seconds: float = 0.0
    runtime_limit: float | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.verdict == PASS for r in self.rows)

    @property
    def failing(self) -> list:
        return [r for r in self.rows if r.verdict != PASS]


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _exp(cid):
    return f"criterion-{cid}"


def _timed(fn):
    def wrapper(quick=False, seed=0, workers=1):
        t0 = time.perf_counter()
        res = fn(quick=quick, seed=seed, workers=workers)
        res.seconds = time.perf_counter() - t0
        if res.runtime_limit is not None:
            res.rows.append(ResultRow(_exp(res.cid), f"runtime <= {res.runtime_limit:g} s",
                                      _verdict(res.seconds <= res.runtime_limit)))
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel_row(cid, check, measured, reference, rel=1e-8, N=None, s=None):
    residual = abs(measured - reference)
    budget = rel * abs(reference)
    return ResultRow(_exp(cid), check, _verdict(residual <= budget), N=N, s=s,
                     measured=measured, formula=reference, residual=residual, budget=budget)


@_timed
def closed_forms(quick=False, seed=0, workers=1):
    """Quadrature reproduces the three closed-form kernel integrals."""
    res = CriterionResult(1, "closed-form kernel integrals",
                          "int R1 = N, int R1/sin^2(t/2) = 2N^2, int dt/((1-s)^2+4s sin^2(t/2)) = pi/(1-s^2)",
                          runtime_limit=30.0)
    for N in (1, 5, 20, 100):
        res.rows.append(_rel_row(1, "int R1 = N", kernels.r1_integral_quad(N), float(N), N=N))
        res.rows.append(_rel_row(1, "int R1/sin^2 = 2N^2", kernels.r1_over_sin2_integral_quad(N),
                                 kernels.r1_over_sin2_integral(N), N=N))
    for s in (0.5, 0.9, 0.99, 1.0 - 1e-6):
        res.rows.append(_rel_row(1, "I(s) = pi/(1-s^2)", kernels.lorentzian_integral_quad(s),
                                 kernels.lorentzian_integral(s), s=s))
    return res


def _bin_probabilities(N, edges):
    rule = QuadratureRule(panels=max(4, N))
    probs = [integrate_1d(lambda t: kernels.r1(N, t), lo, hi, rule) / N for lo, hi in zip(edges[:-1], edges[1:])]
    return np.asarray(probs)


@_timed
def sampler_validity(quick=False, seed=0, workers=1):
    """Haar QR sampler against the one-point function and against MCMC."""
    res = CriterionResult(2, "sampler validity",
                          "QR-Haar eigenangles follow R1/N; QR and MCMC samplers agree in law",
                          runtime_limit=300.0)
    N, M = 10, (4000 if quick else 20_000)
    angles = moments.haar_angles(N, M, derived_seed(seed, 2), workers)
    trace = 1.0 + 2.0 * np.cos(angles).sum(axis=1)
    oracle = 1.0 + integrate_1d(lambda t: 2.0 * np.cos(t) * kernels.r1(N, t), 0.0, math.pi,
                                QuadratureRule(panels=kernels.oscillation_panels(N)))
    acc = moments.RunningMoments().add(trace)
    resid = abs(acc.mean - oracle)
    res.rows.append(ResultRow(_exp(2), f"mean Tr(X), M={M}", _verdict(resid <= moments.MC_SIGMAS * acc.stderr),
                              N=N, measured=acc.mean, stderr=acc.stderr, formula=oracle, residual=resid, budget=0.0))
    edges = np.linspace(0.0, math.pi, 51)
    counts, _ = np.histogram(angles.ravel(), bins=edges)
    probs = _bin_probabilities(N, edges)
    expected = counts.sum() * probs / probs.sum()
    p = float(stats.chisquare(counts, expected).pvalue)
    res.rows.append(ResultRow(_exp(2), "angle histogram vs R1/N, 50 bins, chi-square p > 0.001",
                              _verdict(p > 1e-3), N=N, measured=p, budget=1e-3))
    draws = 2000 if quick else 10_000
    for n in (1, 2, 3):
        qr = moments.haar_angles(n, draws, derived_seed(seed, 20 + n), workers)
        mc = mcmc_angle_draws(n, draws, RngStream(derived_seed(seed, 30 + n)))
        for j in range(n):
            pj = float(stats.ks_2samp(qr[:, j], mc[:, j]).pvalue)
            res.rows.append(ResultRow(_exp(2), f"KS QR vs MCMC, coordinate {j + 1}, p > 0.001",
                                      _verdict(pj > 1e-3), N=n, measured=pj, budget=1e-3))
    return res


@_timed
def cross_path(quick=False, seed=0, workers=1):
    """Log-derivative from the eigenangles against the trace formula."""
    res = CriterionResult(3, "log-derivative cross-path",
                          "sum over eigenangles = -tr(X^T (I - s X^T)^-1)")
    for N in (5, 20):
        gen = RngStream(derived_seed(seed, 3), N).generator()
        worst = 0.0
        for _ in range(100):
            X = sample_haar_so(N, gen)
            s = float(gen.uniform(0.0, 0.9))
            d = abs(log_deriv_from_angles(eigenangles_of(X), s) - log_deriv_from_matrix(X, s))
            worst = max(worst, d)
        res.rows.append(ResultRow(_exp(3), "max |angle path - trace path| over 100 pairs",
                                  _verdict(worst <= 1e-8), N=N, measured=worst, formula=0.0,
                                  residual=worst, budget=1e-8))
    return res


@_timed
def theorem2_desk(quick=False, seed=0, workers=1):
    """Monte Carlo scaled moments against ``1 - K a``."""
    res = CriterionResult(4, "leading-order scaled moment",
                          "E[(1+x)^K] = 1 - Ka + O(a^2) + O(a/N)", runtime_limit=600.0)
    N, M = 100, (10_000 if quick else 100_000)
    s4 = derived_seed(seed, 4)
    for a in (0.01, 0.005):
        for K in (0.5, 1.5, 2.5):
            est = moments.scaled_moment_mc(EvaluationPoint(N, a, K), M, s4, workers)
            rep = asy.compare(est, "theorem2")
            res.rows.append(ResultRow.from_report(_exp(4), f"MC vs 1 - Ka, M={M}", rep))
    return res


A_SCAN = (1e-3, 1e-4, 1e-5, 1e-6)


@_timed
def h1_asymptotics(quick=False, seed=0, workers=1):
    """Deterministic h(1) against its two-term expansion."""
    res = CriterionResult(5, "h(1) two-term expansion",
                          "h(1) = N(s-1) + N(N-1)(1-s)^2 + O(N^3 (1-s)^3)")
    for N in (10, 50):
        us, rs = [], []
        for a in A_SCAN:
            p = EvaluationPoint(N, a)
            u = p.one_minus_s
            r = abs(exact.h1_expansion_residual(p))
            budget = asy.h1_budget(N, u)
            us.append(u)
            rs.append(r)
            res.rows.append(ResultRow(_exp(5), "residual / (N^3 (1-s)^3) <= 10", _verdict(r <= 10 * budget),
                                      N=N, a=a, s=p.s, measured=exact.h_exact(1, p),
                                      formula=asy.h1_asymptotic(N, u), residual=r, budget=budget))
        slope = asy.loglog_slope(us, rs).slope
        res.rows.append(ResultRow(_exp(5), "log-log slope in (1-s) = 3 +- 0.1", _verdict(abs(slope - 3) <= 0.1),
                                  N=N, slope=slope, measured=slope, formula=3.0, residual=abs(slope - 3), budget=0.1))
    return res


@_timed
def h2_leading(quick=False, seed=0, workers=1):
    """Deterministic h(2) against ``N^2 (1-s)^2``."""
    res = CriterionResult(6, "h(2) leading order", "h(2) = N^2 (1-s)^2 (1 + o(1)) as s -> 1")
    N = 5
    prev = math.inf
    for a in A_SCAN:
        p = EvaluationPoint(N, a)
        lead = asy.h2_asymptotic(N, p.one_minus_s)
        h2 = exact.h_exact(2, p)
        rel = abs(h2 - lead) / lead
        ok = rel < prev and (a != 1e-5 or rel < 1e-2)
        check = "relative residual decreasing" + ("; < 1e-2 at a = 1e-5" if a == 1e-5 else "")
        res.rows.append(ResultRow(_exp(6), check, _verdict(ok), N=N, a=a, s=p.s, measured=h2,
                                  formula=lead, residual=abs(h2 - lead), budget=1e-2 * lead))
        prev = rel
    return res


def theorem3_reconstruction_residual(N, K, a, dps=MP_DPS):
    """``|P sum_{n<=3} binom(K,n) h(n) - theorem3|`` in mpmath, P the prefactor ratio."""
    import mpmath
    p = EvaluationPoint(N, a, K)
    with mpmath.workdps(dps + 10):
        h = exact.gram_moments(p, 3, dps=dps)
        Km, am = mpmath.mpf(K), mpmath.mpf(a)
        u = exact.mp_one_minus_s(p, dps + 10)
        total = mpmath.fsum(gen_binom(Km, n) * h[n] for n in range(4))
        value = asy.prefactor_ratio(Km, am, N, u) * total
        formula = asy.theorem3_formula(Km, am, N, 3)
        return p, value, formula, abs(value - formula)


@_timed
def theorem3_reconstruction(quick=False, seed=0, workers=1):
    """Exact h(0..3) assembled into the scaled moment against the second-order formula."""
    res = CriterionResult(7, "second-order scaled moment",
                          "((a/N)/(1-s))^K sum_{n<=3} binom(K,n) h(n) = theorem-3 expansion + O(a^3)")
    a_scan = (1e-4, 1e-5, 1e-6, 1e-7)
    for N in ((2,) if quick else (2, 3)):
        for K in (1.5, 2.5):
            resid = []
            for a in a_scan:
                p, value, formula, r = theorem3_reconstruction_residual(N, K, a)
                budget = asy.theorem3_budget(a, N, 3)
                resid.append(r)
                res.rows.append(ResultRow(_exp(7), "residual <= 5 (N^4 a^4 + N^3 a^3)",
                                          _verdict(r <= asy.DEFAULT_MULTIPLIER * budget), N=N, a=a, s=p.s,
                                          K=K, m=3, measured=value, formula=formula, residual=r, budget=budget))
            slope = asy.loglog_slope(list(a_scan), resid).slope
            res.rows.append(ResultRow(_exp(7), f"log-log slope in a >= 3 (fit tolerance {SLOPE_FIT_TOL:g})",
                                      _verdict(slope >= 3 - SLOPE_FIT_TOL), N=N, K=K, m=3, slope=slope,
                                      measured=slope, formula=3.0, budget=SLOPE_FIT_TOL))
    return res


def _violation_row(check, count, **kw):
    return ResultRow(_exp(8), check, _verdict(count == 0), measured=float(count), formula=0.0,
                     residual=float(count), budget=0.0, **kw)


def bounding_violations(n_configs, seed):
    gen = RngStream(derived_seed(seed, 8)).generator()
    Ns = (1, 2, 5, 10, 50)
    per_s = 100
    bad = 0
    total = 0
    for N in Ns:
        for _ in range(max(1, n_configs // (len(Ns) * per_s))):
            s = float(gen.uniform(0.0, 1.0))
            th = gen.uniform(0.0, math.pi, size=(per_s, N))
            x = scaled_ratio_x(th, s)
            lo, hi = scaled_ratio_bounds(N, s)
            tol = 1e-12 * max(1.0, abs(lo), hi)
            bad += int(np.count_nonzero((x < lo - tol) | (x > hi + tol)))
            total += per_s
    return bad, total


def taylor_violations():
    x = np.linspace(-0.5, 10.0, 2101)
    bad = 0
    for K in (0.5, 1.5, 2.7):
        for m in (3, 5):
            exact_v = (1.0 + x) ** K
            rem = np.abs(exact_v - taylor_truncation(x, K, m))
            bound = taylor_remainder_constant(K, m) * np.abs(x) ** (m + 1)
            slack = 1e-14 * np.maximum(np.abs(exact_v), 1.0) * (m + 2)
            bad += int(np.count_nonzero(rem > bound + slack))
    return bad


def poly_basis_violations():
    bad = 0
    for n in range(65):
        c = poly_basis_coeffs(n)
        bad += sum(c) != (1 if n == 0 else 0)
        bad += sum(k * ck for k, ck in enumerate(c)) != (1 if n == 1 else 0)
    return bad


@_timed
def property_suites(quick=False, seed=0, workers=1):
    """Explicit inequalities checked on random configurations and grids."""
    res = CriterionResult(8, "explicit bounds",
                          "homographic bounds on x, Taylor remainder, basis identities, kernel and I_l bounds")
    n_configs = 10_000 if quick else 100_000
    bad, total = bounding_violations(n_configs, seed)
    res.rows.append(_violation_row(f"2(s-1)N/(s+1) <= x <= 2N on {total} configurations", bad))
    res.rows.append(_violation_row("Taylor remainder <= C_{K,m}|x|^(m+1) on grid", taylor_violations()))
    res.rows.append(_violation_row("basis identities exact for n <= 64", poly_basis_violations()))
    theta = np.linspace(0.0, math.pi, 10_000)
    xs = np.linspace(-2 * math.pi, 2 * math.pi, 10_000)
    for N in (1, 2, 5, 10, 50):
        res.rows.append(_violation_row("|R1| <= N(4N^2-1) t^2 / (6 pi)",
                                       kernels.r1_quadratic_bound_violations(N, theta), N=N))
        res.rows.append(_violation_row("|S_2N(x) - N/pi| <= N^2 |x| / (2 pi)",
                                       kernels.sine_kernel_lipschitz_violations(N, xs), N=N))
    for l in (2, 3, 4):
        for s in (0.5, 0.9, 0.99):
            val = kernels.lorentzian_power_integral(l, s)
            bound = kernels.lorentzian_power_bound(l, s)
            # l = 2 attains the bound exactly; allow for the quadrature error.
            res.rows.append(ResultRow(_exp(8), f"I_{l}(s) <= pi / (2 (1-s)^{2 * l - 3} (1+s)^3)",
                                      _verdict(val <= bound * (1 + QUAD_SLACK)), s=s, measured=val,
                                      formula=bound, budget=bound))
    return res


@_timed
def reproducibility(quick=False, seed=0, workers=1):
    """Re-running a seeded Monte Carlo experiment reproduces its table byte for byte."""
    from .io import csv_text
    res = CriterionResult(9, "reproducibility", "(config, seed, workers) -> outputs is a pure function")
    texts = []
    for _ in range(2):
        moments.clear_sample_cache()
        est = moments.scaled_moment_mc(EvaluationPoint(10, 0.05, 1.5), 2000, derived_seed(seed, 9), workers)
        rep = asy.compare(est, "theorem2")
        texts.append(csv_text([ResultRow.from_report(_exp(9), "rerun", rep)]))
    res.rows.append(ResultRow(_exp(9), "seeded MC table identical on rerun", _verdict(texts[0] == texts[1])))
    return res


CRITERIA = (closed_forms, sampler_validity, cross_path, theorem2_desk, h1_asymptotics,
            h2_leading, theorem3_reconstruction, property_suites, reproducibility)
