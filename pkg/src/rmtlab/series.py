"""Polynomial machinery for the non-integer power ``(1 + x)^K``."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, InvalidArgumentError


def gen_binom(alpha, n: int):
    """Generalised binomial ``(1/n!) prod_{j<n} (alpha - j)``.

    Exact for ``Fraction`` / integer ``alpha``; otherwise follows the type
    of ``alpha`` (float, mpmath number).
    """
    if int(n) != n or n < 0:
        raise InvalidArgumentError("n must be a nonnegative integer")
    n = int(n)
    out = alpha * 0 + 1
    for j in range(n):
        out = out * (alpha - j)
    if isinstance(out, (int, Fraction)):
        return Fraction(out, math.factorial(n))
    return out / math.factorial(n)


def poly_basis_coeffs(n: int) -> list[int]:
    """Coefficients ``a_{k,n}`` with ``X^n = sum_k a_{k,n} (1 + X)^k``.

    ``a_{k,n} = (-1)^(n-k) C(n, k)``, exact integers, ``0 <= n <= 64``.
    """
    if int(n) != n or not 0 <= n <= 64:
        raise InvalidArgumentError("poly_basis_coeffs supports 0 <= n <= 64")
    n = int(n)
    return [(-1) ** (n - k) * math.comb(n, k) for k in range(n + 1)]


def taylor_remainder_constant(K: float, m: int) -> float:
    """``C_{K,m} = |binom(K, m+1)| 2^(m+1-K)``, valid for ``m >= floor(K)``."""
    if int(m) != m or m < math.floor(K):
        raise InvalidArgumentError("need an integer m >= floor(K)")
    return abs(float(gen_binom(K, int(m) + 1))) * 2.0 ** (m + 1 - K)


def taylor_truncation(x, K: float, m: int):
    """``sum_{n=0}^m binom(K, n) x^n`` for ``x >= -1/2``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -0.5):
        raise DomainError("taylor_truncation requires x >= -1/2")
    if int(m) != m or m < 0:
        raise InvalidArgumentError("m must be a nonnegative integer")
    coeffs = [float(gen_binom(K, n)) for n in range(int(m) + 1)]
    out = np.polynomial.polynomial.polyval(xa, coeffs)
    return out if np.ndim(out) else float(out)
