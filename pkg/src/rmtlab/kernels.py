"""Sine kernel and correlation functions of the SO(2N+1) eigenangles.

The eigenangles of a Haar SO(2N+1) matrix (fixed eigenvalue 1 excluded,
one representative per conjugate pair) form a determinantal point process
on [0, pi] with kernel

    K(t, u) = S_{2N}(t - u) - S_{2N}(t + u),
    S_m(t)  = (1 / 2 pi) sin(m t / 2) / sin(t / 2).

Everything here is a pure, vectorised function of its arguments.  Near
removable singularities the analytic limit is used whenever the
denominator falls below ``LIMIT_EPS`` in magnitude.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgumentError, PoleError, UnsupportedOrderError
from .quadrature import QuadratureRule, integrate_1d, oscillation_panels

LIMIT_EPS = 1e-8
MAX_CORRELATION_ORDER = 6


def _check_N(N) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidArgumentError(f"N must be a positive integer, got {N!r}")
    return int(N)


def sine_kernel(m: int, theta):
    """``S_m(theta) = sin(m theta / 2) / (2 pi sin(theta / 2))``, limit-safe."""
    t = np.asarray(theta, dtype=float)
    den = np.sin(0.5 * t)
    small = np.abs(den) < LIMIT_EPS
    safe = np.where(small, 1.0, den)
    direct = np.sin(0.5 * m * t) / safe
    # L'Hopital: m cos(m t / 2) / cos(t / 2), equal to +-m at multiples of 2 pi.
    limit = m * np.cos(0.5 * m * t) / np.cos(0.5 * t)
    out = np.where(small, limit, direct) / (2.0 * math.pi)
    return out if out.ndim else float(out)


def kernel(N: int, t, u):
    """Correlation kernel ``S_{2N}(t - u) - S_{2N}(t + u)``."""
    N = _check_N(N)
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    return sine_kernel(2 * N, t - u) - sine_kernel(2 * N, t + u)


def basis(N: int, theta):
    """Orthonormal functions ``sqrt(2/pi) sin((j - 1/2) theta)``, j = 1..N.

    The kernel factorises as ``K(t, u) = sum_j psi_j(t) psi_j(u)``; returned
    shape is ``theta.shape + (N,)``.
    """
    N = _check_N(N)
    t = np.asarray(theta, dtype=float)
    freqs = np.arange(1, N + 1) - 0.5
    return math.sqrt(2.0 / math.pi) * np.sin(t[..., None] * freqs)


def _r1_sum(N, t):
    # (2/pi) sum_j sin^2((j - 1/2) t): no cancellation near t = 0.
    freqs = np.arange(1, N + 1) - 0.5
    return (2.0 / math.pi) * np.sum(np.sin(t[..., None] * freqs) ** 2, axis=-1)


def r1(N: int, theta):
    """One-point correlation ``N/pi - sin(2 N theta) / (2 pi sin theta)``.

    For ``N |theta| < 1`` the equivalent positive sum over the basis is used,
    which keeps full relative accuracy where ``R_1 ~ theta^2``.
    """
    N = _check_N(N)
    t = np.asarray(theta, dtype=float)
    den = np.sin(t)
    small = np.abs(den) < LIMIT_EPS
    safe = np.where(small, 1.0, den)
    ratio = np.where(small, 2 * N * np.cos(2 * N * t) / np.cos(t), np.sin(2 * N * t) / safe)
    out = N / math.pi - ratio / (2.0 * math.pi)
    near0 = np.abs(t) * N < 1.0
    if np.any(near0):
        out = np.where(near0, _r1_sum(N, np.where(near0, t, 0.0)), out)
    return out if out.ndim else float(out)


def r1_over_sin2(N: int, theta):
    """``R_1(theta) / sin^2(theta / 2)`` with its limit ``2N(4N^2-1)/(3 pi)`` at 0."""
    N = _check_N(N)
    t = np.asarray(theta, dtype=float)
    freqs = np.arange(1, N + 1) - 0.5
    s2 = np.sin(0.5 * t)
    small = np.abs(s2) < LIMIT_EPS
    safe = np.where(small, 1.0, s2)[..., None]
    ratio = np.sin(t[..., None] * freqs) / safe
    ratio = np.where(small[..., None], 2.0 * freqs * np.cos(t[..., None] * freqs) / np.cos(0.5 * t)[..., None], ratio)
    out = (2.0 / math.pi) * np.sum(ratio**2, axis=-1)
    return out if out.ndim else float(out)


def r2(N: int, t1, t2):
    """Pair correlation ``R_1(t1) R_1(t2) - K(t1, t2)^2``."""
    k = kernel(N, t1, t2)
    out = r1(N, t1) * r1(N, t2) - k * k
    return out


def rn(N: int, thetas):
    """n-point correlation ``det[K(theta_k, theta_j)]`` for ``1 <= n <= 6``.

    ``thetas`` has shape ``(..., n)``; the determinant is taken by LU with
    partial pivoting over the trailing ``n x n`` blocks.
    """
    N = _check_N(N)
    th = np.asarray(thetas, dtype=float)
    if th.ndim == 0:
        th = th[None]
    n = th.shape[-1]
    if n < 1:
        raise InvalidArgumentError("rn needs at least one angle")
    if n > MAX_CORRELATION_ORDER:
        raise UnsupportedOrderError(f"rn supports n <= {MAX_CORRELATION_ORDER}, got {n}")
    mat = kernel(N, th[..., :, None], th[..., None, :])
    # Diagonal through r1 to keep its small-angle accuracy.
    idx = np.arange(n)
    mat[..., idx, idx] = r1(N, th)
    out = np.linalg.det(mat)
    return out if np.ndim(out) else float(out)


def lorentzian(s: float, theta, power: int = 1):
    """``((1-s)^2 + 4 s sin^2(theta/2))^-power``."""
    t = np.asarray(theta, dtype=float)
    return ((1.0 - s) ** 2 + 4.0 * s * np.sin(0.5 * t) ** 2) ** (-power)


def lorentzian_integral(s: float) -> float:
    """Closed form ``int_0^pi d theta / ((1-s)^2 + 4 s sin^2(theta/2)) = pi / (1 - s^2)``."""
    if s >= 1:
        raise PoleError("lorentzian_integral requires s < 1")
    if s < 0:
        raise InvalidArgumentError("lorentzian_integral requires s >= 0")
    return math.pi / (1.0 - s * s)


def lorentzian_integral_quad(s: float, **kw) -> float:
    """Quadrature value of the same integral, panels graded at the pole."""
    if s >= 1:
        raise PoleError("lorentzian_integral requires s < 1")
    rule = QuadratureRule(panels=64, pole_width=max(1.0 - s, 1e-300) if s > 0 else None)
    return integrate_1d(lambda t: lorentzian(s, t), 0.0, math.pi, rule, **kw)


def r1_integral_quad(N: int, **kw) -> float:
    """``int_0^pi R_1`` by quadrature (closed form: N)."""
    N = _check_N(N)
    rule = QuadratureRule(panels=oscillation_panels(N))
    return integrate_1d(lambda t: r1(N, t), 0.0, math.pi, rule, **kw)


def r1_over_sin2_integral(N: int) -> float:
    """Closed form ``int_0^pi R_1 / sin^2(theta/2) = 2 N^2``."""
    N = _check_N(N)
    return 2.0 * N * N


def r1_over_sin2_integral_quad(N: int, **kw) -> float:
    N = _check_N(N)
    rule = QuadratureRule(panels=oscillation_panels(N))
    return integrate_1d(lambda t: r1_over_sin2(N, t), 0.0, math.pi, rule, **kw)


def lorentzian_power_integral(l: int, s: float, **kw) -> float:
    """``I_l(s) = int_0^pi sin^2(theta/2) / ((1-s)^2 + 4 s sin^2(theta/2))^l``.

    Bounded above by ``lorentzian_power_bound(l, s)`` for ``l >= 2``.
    """
    if int(l) != l or l < 2:
        raise InvalidArgumentError("l must be an integer >= 2")
    if not 0 < s < 1:
        raise (PoleError if s >= 1 else InvalidArgumentError)("requires 0 < s < 1")
    rule = QuadratureRule(panels=64, pole_width=1.0 - s)
    return integrate_1d(lambda t: np.sin(0.5 * t) ** 2 * lorentzian(s, t, int(l)), 0.0, math.pi, rule, **kw)


def lorentzian_power_bound(l: int, s: float) -> float:
    """``pi / (2 (1-s)^(2l-3) (1+s)^3)``."""
    return math.pi / (2.0 * (1.0 - s) ** (2 * l - 3) * (1.0 + s) ** 3)


def r1_quadratic_constant(N: int) -> float:
    """``N (4N^2 - 1) / (6 pi)``: half the sup of ``|R_1''|``."""
    N = _check_N(N)
    return N * (4.0 * N * N - 1.0) / (6.0 * math.pi)


# Absorbs last-ulp rounding where the bound is attained to leading order.
_BOUND_SLACK = 1e-12


def r1_quadratic_bound_violations(N: int, theta) -> int:
    """Number of points where ``|R_1(theta)| > N(4N^2-1) theta^2 / (6 pi)``."""
    t = np.asarray(theta, dtype=float)
    lhs = np.abs(r1(N, t))
    rhs = r1_quadratic_constant(N) * t * t
    return int(np.count_nonzero(~(lhs <= rhs * (1.0 + _BOUND_SLACK) + 1e-300)))


def r1_quadratic_bound_check(N: int, theta) -> bool:
    return r1_quadratic_bound_violations(N, theta) == 0


def sine_kernel_lipschitz_violations(N: int, x) -> int:
    """Number of points where ``|S_{2N}(x) - N/pi| > N^2 |x| / (2 pi)``."""
    N = _check_N(N)
    x = np.asarray(x, dtype=float)
    # S_{2N}(x) - N/pi = -R_1(x/2): evaluate through r1 for accuracy near 0.
    lhs = np.abs(r1(N, 0.5 * x))
    rhs = N * N * np.abs(x) / (2.0 * math.pi)
    direct = np.abs(sine_kernel(2 * N, x) - N / math.pi)
    ok_r1 = lhs <= rhs * (1.0 + _BOUND_SLACK) + 1e-300
    ok_direct = direct <= rhs * (1.0 + _BOUND_SLACK) + 4e-16 * N
    return int(np.count_nonzero(~(ok_r1 & ok_direct)))


def sine_kernel_lipschitz_check(N: int, x) -> bool:
    return sine_kernel_lipschitz_violations(N, x) == 0
