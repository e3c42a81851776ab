"""Deterministic values of h(n, s, N) = E[x^n] and of the g integrals.

Two independent routes:

``partition``
    ``E[(sum_i phi(theta_i))^n]`` is expanded over the set partitions of
    {1..n}; a partition with k blocks of sizes b_1..b_k contributes
    ``int prod_i phi(t_i)^{b_i} R_k(t_1..t_k) dt`` over [0, pi]^k.  The
    integrals use the tensor-product rules of :mod:`rmtlab.quadrature`.

``gram``
    The kernel is the projection ``sum_j psi_j(t) psi_j(u)`` onto N sine
    functions, so ``E[prod_i (1 + g(theta_i))] = det(I + [int g psi_j psi_k])``.
    Taking ``g = exp(t phi) - 1`` and expanding log det in powers of t
    gives the cumulants of x from the 1-D Gram integrals
    ``int phi^p psi_j psi_k``.  This route also runs in mpmath at any
    working precision, which the float64 partition route cannot match
    when residuals of size (a/N)^3 are wanted.
"""
from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import AccuracyError, InvalidArgumentError, UnsupportedOrderError
from .logderiv import EvaluationPoint, lorentzian_terms, pair_term
from .quadrature import QuadratureRule, integrate_1d, integrate_nd, nodes_weights, oscillation_panels

MAX_EXACT_ORDER = 3
ND_ORDER = 8


def set_partitions(n: int):
    """All set partitions of ``range(n)`` as lists of blocks."""
    if n == 0:
        yield []
        return
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n - 1]] + part[i + 1:]
        yield part + [[n - 1]]


def partition_shapes(n: int) -> Counter:
    """Multiplicity of each sorted block-size tuple among partitions of n."""
    return Counter(tuple(sorted((len(b) for b in p), reverse=True)) for p in set_partitions(n))


def _rule_1d(N, u):
    return QuadratureRule(panels=oscillation_panels(N), pole_width=u)


def _rule_nd(N, u):
    # Refinement doubles every axis at once, so start coarse.
    return QuadratureRule(order=ND_ORDER, panels=max(4, N), pole_width=u)


def _r3(N, t1, t2, t3):
    """Three-point function by the 3x3 cofactor expansion (cheaper than a stacked det)."""
    k11, k22, k33 = kernels.r1(N, t1), kernels.r1(N, t2), kernels.r1(N, t3)
    k12, k13, k23 = kernels.kernel(N, t1, t2), kernels.kernel(N, t1, t3), kernels.kernel(N, t2, t3)
    return (k11 * k22 * k33 + 2.0 * k12 * k23 * k13
            - k11 * k23 * k23 - k22 * k13 * k13 - k33 * k12 * k12)


def _block_integral(N, shape, weight, u, rtol):
    """``int prod_i weight(t_i)^{b_i} R_k(t) dt`` for block sizes ``shape``."""
    k = len(shape)
    if k == 1:
        b = shape[0]
        return integrate_1d(lambda t: weight(t) ** b * kernels.r1(N, t), 0.0, math.pi, _rule_1d(N, u), rtol=rtol)
    if k == 2:
        b1, b2 = shape
        return integrate_nd(lambda t1, t2: weight(t1) ** b1 * weight(t2) ** b2 * kernels.r2(N, t1, t2),
                            2, _rule_nd(N, u), rtol=rtol)
    if k == 3:
        def f(t1, t2, t3):
            return weight(t1) ** shape[0] * weight(t2) ** shape[1] * weight(t3) ** shape[2] * _r3(N, t1, t2, t3)
        return integrate_nd(f, 3, _rule_nd(N, u), rtol=rtol)
    raise UnsupportedOrderError("partition route supports at most 3 blocks")


def linear_statistic_moment(N: int, weight, n: int, pole_width: float, rtol: float = 1e-11) -> float:
    """``E[(sum_i weight(theta_i))^n]`` by the partition expansion, ``n <= 3``."""
    if n == 0:
        return 1.0
    if n > MAX_EXACT_ORDER:
        raise UnsupportedOrderError(f"exact moments supported for n <= {MAX_EXACT_ORDER}")
    total = []
    for shape, mult in sorted(partition_shapes(n).items()):
        if len(shape) > N:
            continue  # R_k vanishes identically when k > N
        total.append(mult * _block_integral(N, shape, weight, pole_width, rtol))
    return math.fsum(total)


def _check_order(n):
    if int(n) != n or n < 0:
        raise InvalidArgumentError("n must be a nonnegative integer")
    if n > MAX_EXACT_ORDER:
        raise UnsupportedOrderError(f"h_exact supports n <= {MAX_EXACT_ORDER}; use h_mc beyond")
    return int(n)


def h_exact(n: int, point: EvaluationPoint, method: str = "partition", dps: int | None = None,
            rtol: float = 1e-11):
    """Deterministic ``h(n, s, N) = E[x^n]`` for ``0 <= n <= 3``.

    ``method="partition"`` integrates against the correlation functions;
    ``method="gram"`` uses the Fredholm-determinant cumulant expansion and
    accepts ``dps`` for an mpmath evaluation (returns an ``mpf``).
    """
    n = _check_order(n)
    if method == "partition":
        if dps is not None:
            raise InvalidArgumentError("the partition route is float64 only")
        s, u = point.s, point.one_minus_s
        if n == 1:
            return h1_summand_form(point, rtol=rtol)
        return linear_statistic_moment(point.N, lambda t: pair_term(t, s, u), n, u, rtol)
    if method == "gram":
        return gram_moments(point, n, dps=dps)[n]
    raise InvalidArgumentError(f"unknown method {method!r}")


def lorentzian_r1_integral(point: EvaluationPoint, power: int = 1, rtol: float = 1e-11) -> float:
    """``int_0^pi R_1(t) f(t)^power dt`` with f the Lorentzian factor."""
    N, s, u = point.N, point.s, point.one_minus_s
    return integrate_1d(lambda t: kernels.r1(N, t) * lorentzian_terms(t, s, u) ** power,
                        0.0, math.pi, _rule_1d(N, u), rtol=rtol)


def h1_summand_form(point: EvaluationPoint, rtol: float = 1e-11) -> float:
    """``h(1) = (s-1) [N/s + (s^2-1)/s int R_1 f]``."""
    s, u, N = point.s, point.one_minus_s, point.N
    J = lorentzian_r1_integral(point, rtol=rtol)
    return -(u / s) * (N - u * (1.0 + s) * J)


def h1_direct_form(point: EvaluationPoint, rtol: float = 1e-11) -> float:
    """``h(1) = (s-1) int R_1 (2s - 2cos t) / (1 + s^2 - 2 s cos t) dt``."""
    N, s, u = point.N, point.s, point.one_minus_s

    def f(t):
        sh2 = np.sin(0.5 * t) ** 2
        # 2s - 2cos t = -2u + 4 sin^2(t/2);  1 + s^2 - 2s cos t = u^2 + 4 s sin^2(t/2)
        return kernels.r1(N, t) * (-2.0 * u + 4.0 * sh2) / (u * u + 4.0 * s * sh2)

    return -u * integrate_1d(f, 0.0, math.pi, _rule_1d(N, u), rtol=rtol)


def h1_pole_integral(point: EvaluationPoint, rtol: float = 1e-11) -> float:
    """``L(s) = int_0^pi (R_1(t) / sin^2(t/2)) f(t) dt`` (grows like 1/(1-s))."""
    N, s, u = point.N, point.s, point.one_minus_s
    return integrate_1d(lambda t: kernels.r1_over_sin2(N, t) * lorentzian_terms(t, s, u),
                        0.0, math.pi, _rule_1d(N, u), rtol=rtol)


def h1_expansion_residual(point: EvaluationPoint, rtol: float = 1e-11) -> float:
    """``h(1) - [N(s-1) + N(N-1)(1-s)^2]`` without cancellation.

    Splitting ``f = 1/(4 s sin^2) - u^2 / (4 s sin^2 (u^2 + 4 s sin^2))``
    and using ``int R_1 / sin^2(t/2) = 2N^2`` gives, with u = 1 - s,

        h(1) = -N u / s + N^2 u^2 (1+s) / (2 s^2) - u^4 (1+s) / (4 s^2) L(s),

    whose difference from the two-term expansion is
    ``u^3 [N^2 (3 - 2u) / (2 s^2) - N / s] - u^4 (1+s) L / (4 s^2)``.
    """
    N, s, u = point.N, point.s, point.one_minus_s
    L = h1_pole_integral(point, rtol=rtol)
    closed = u**3 * (N * N * (3.0 - 2.0 * u) / (2.0 * s * s) - N / s)
    return closed - u**4 * (1.0 + s) * L / (4.0 * s * s)


def h1_from_pole_split(point: EvaluationPoint, rtol: float = 1e-11) -> float:
    N, s, u = point.N, point.s, point.one_minus_s
    L = h1_pole_integral(point, rtol=rtol)
    return -N * u / s + N * N * u * u * (1.0 + s) / (2.0 * s * s) - u**4 * (1.0 + s) * L / (4.0 * s * s)


# ---------------------------------------------------------------------------
# g integrals


def g_exact_low(exponents, point: EvaluationPoint, rtol: float = 1e-11) -> float:
    """``g(l)`` for ``l`` in {(1,), (2,), (1, 1)} through R_1 and R_2."""
    l = tuple(sorted((int(e) for e in exponents), reverse=True))
    N, s, u = point.N, point.s, point.one_minus_s
    if l in ((1,), (2,)):
        return lorentzian_r1_integral(point, power=l[0], rtol=rtol) / N
    if l == (1, 1):
        if N < 2:
            raise InvalidArgumentError("g(1, 1) needs N >= 2")
        val = integrate_nd(lambda t1, t2: lorentzian_terms(t1, s, u) * lorentzian_terms(t2, s, u)
                           * kernels.r2(N, t1, t2), 2, _rule_nd(N, u), rtol=rtol)
        return val / (N * (N - 1))
    raise UnsupportedOrderError("g_exact_low supports exponents (1), (2) and (1, 1)")


# ---------------------------------------------------------------------------
# Gram / Fredholm route


def _series_cumulants_to_moments(kappa, n, one):
    """Moments ``m_0..m_n`` from cumulant generating coefficients ``c_k``.

    ``kappa[k]`` is the coefficient of t^k in log E[e^{tx}] (k >= 1).
    """
    e = [one] + [one * 0] * n
    for k in range(1, n + 1):
        acc = one * 0
        for j in range(1, k + 1):
            acc += j * kappa[j] * e[k - j]
        e[k] = acc / k
    return [math.factorial(k) * e[k] for k in range(n + 1)]


def _logdet_series(G, n, matmul, trace, zero_like):
    """Coefficients of ``tr log(I + M(t))`` with ``M(t) = sum_p t^p / p! G[p]``."""
    M = [None] + [G[p] / math.factorial(p) for p in range(1, n + 1)]
    power = M[:]  # coefficients of M^1
    out = [0] * (n + 1)
    for r in range(1, n + 1):
        if r > 1:
            new = [None] * (n + 1)
            for k in range(r, n + 1):
                acc = None
                for i in range(r - 1, k):
                    j = k - i
                    if power[i] is None or M[j] is None:
                        continue
                    term = matmul(power[i], M[j])
                    acc = term if acc is None else acc + term
                new[k] = acc
            power = new
        sign = 1 if r % 2 else -1
        for k in range(r, n + 1):
            if power[k] is not None:
                out[k] = out[k] + sign * trace(power[k]) / r
    return out


def _theta_breaks(N, u, extra_uniform=0):
    rule = QuadratureRule(panels=max(8, 2 * N) + extra_uniform, pole_width=u)
    return rule.breakpoints(0.0, math.pi)


def _gram_float(point, n, order=16, rtol=1e-12, max_doublings=6):
    N, s, u = point.N, point.s, point.one_minus_s
    breaks = _theta_breaks(N, u)
    prev = None
    for _ in range(max_doublings):
        x, w = nodes_weights(breaks, order)
        x, w = x.ravel(), w.ravel()
        phi = pair_term(x, s, u)
        psi = kernels.basis(N, x)
        G = [None] + [(psi * (w * phi**p)[:, None]).T @ psi for p in range(1, n + 1)]
        if prev is not None:
            diff = max(np.max(np.abs(G[p] - prev[p])) / max(np.max(np.abs(G[p])), 1e-300)
                       for p in range(1, n + 1))
            if diff <= rtol:
                return G
        prev = G
        mid = 0.5 * (breaks[:-1] + breaks[1:])
        breaks = np.sort(np.concatenate([breaks, mid]))
    raise AccuracyError("Gram integrals did not converge")


@lru_cache(maxsize=64)
def _mp_nodes(degree, dps):
    import mpmath
    from mpmath.calculus.quadrature import GaussLegendre
    with mpmath.workdps(dps):
        return tuple(GaussLegendre(mpmath.mp).calc_nodes(degree, mpmath.mp.prec))


def mp_one_minus_s(point: EvaluationPoint, dps: int):
    import mpmath
    with mpmath.workdps(dps):
        return -mpmath.expm1(-mpmath.mpf(point.a) / point.N)


def _gram_mp(point, n, dps, degree=5):
    import mpmath
    N = point.N
    with mpmath.workdps(dps + 10):
        u = mp_one_minus_s(point, dps + 10)
        s = 1 - u
        # Graded breakpoints toward the pole, then uniform panels.
        breaks = [mpmath.mpf(0)]
        w = u / 8
        uniform = mpmath.pi / max(8, 2 * N)
        while w < uniform:
            breaks.append(w)
            w *= 2
        breaks += [uniform * k for k in range(1, max(8, 2 * N) + 1)]
        nodes = _mp_nodes(degree, dps + 10)
        rt = mpmath.sqrt(2 / mpmath.pi)
        G = [None] + [mpmath.zeros(N, N) for _ in range(n)]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            half, mid = (hi - lo) / 2, (hi + lo) / 2
            for xn, wn in nodes:
                t = mid + half * xn
                f = 1 / (u * u + 4 * s * mpmath.sin(t / 2) ** 2)
                phi = -(u / s) * (1 - u * (1 + s) * f)
                psi = [rt * mpmath.sin((j + mpmath.mpf(1) / 2) * t) for j in range(N)]
                wt = half * wn
                pw = wt
                for p in range(1, n + 1):
                    pw = pw * phi
                    Gp = G[p]
                    for j in range(N):
                        for k in range(j, N):
                            Gp[j, k] += pw * psi[j] * psi[k]
        for p in range(1, n + 1):
            for j in range(N):
                for k in range(j + 1, N):
                    G[p][k, j] = G[p][j, k]
        return G


def gram_moments(point: EvaluationPoint, n: int, dps: int | None = None):
    """``[h(0), ..., h(n)]`` through the Gram-matrix cumulant expansion."""
    if int(n) != n or n < 0:
        raise InvalidArgumentError("n must be a nonnegative integer")
    if n > MAX_EXACT_ORDER:
        raise UnsupportedOrderError(f"exact moments supported for n <= {MAX_EXACT_ORDER}")
    if n == 0:
        return [1.0]
    if dps is None:
        G = _gram_float(point, n)
        kappa = _logdet_series(G, n, lambda a, b: a @ b, np.trace, None)
        return [float(v) for v in _series_cumulants_to_moments(kappa, n, 1.0)]
    import mpmath
    with mpmath.workdps(dps + 10):
        G = _gram_mp(point, n, dps)
        kappa = _logdet_series(G, n, lambda a, b: a * b,
                               lambda a: mpmath.fsum(a[i, i] for i in range(a.rows)), None)
        return _series_cumulants_to_moments(kappa, n, mpmath.mpf(1))
