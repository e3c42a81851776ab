"""Logarithmic derivative of the characteristic polynomial ``det(I - s X^T)``.

For X in SO(2N+1) with eigenangles theta_1..theta_N,

    Lambda'/Lambda(s) = -1/(1-s) + sum_n (2s - 2cos theta_n) / (s^2 - 2 s cos theta_n + 1)
                      = -1/(1-s) * (1 + x),

where ``x`` is the scaled ratio of the pair contributions to the
contribution of the fixed eigenvalue 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .ensemble import EigenAngles, SpecialOrthogonalMatrix
from .errors import InvalidArgumentError, PoleError, PreconditionError


@dataclass(frozen=True)
class EvaluationPoint:
    """``(N, a, K)`` with ``s = exp(-a/N)``.

    ``one_minus_s`` is computed as ``-expm1(-a/N)``; forming ``1 - s``
    from ``s`` loses every digit once ``a/N`` approaches 1e-8.
    """

    N: int
    a: float
    K: float = 0.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError(f"N must be a positive integer, got {self.N!r}")
        if not self.a > 0:
            raise InvalidArgumentError("a must be positive")
        if not self.K >= 0:
            raise InvalidArgumentError("K must be nonnegative")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "K", float(self.K))

    @property
    def alpha(self) -> float:
        return self.a / self.N

    @property
    def s(self) -> float:
        return math.exp(-self.alpha)

    @property
    def one_minus_s(self) -> float:
        return -math.expm1(-self.alpha)

    @property
    def feasibility_margin(self) -> float:
        """``2 (1-s) N / (1+s)``; moment operations need this ``<= 1/2``."""
        return 2.0 * self.one_minus_s * self.N / (1.0 + self.s)

    @property
    def feasible(self) -> bool:
        return self.feasibility_margin <= 0.5

    def require_feasible(self) -> "EvaluationPoint":
        if not self.feasible:
            raise PreconditionError(
                f"infeasible point N={self.N}, a={self.a}: 2(1-s)N/(1+s) = "
                f"{self.feasibility_margin:.4g} > 1/2")
        return self

    def with_K(self, K: float) -> "EvaluationPoint":
        return EvaluationPoint(self.N, self.a, K)


def _s_and_u(s):
    """Accept a float ``s`` or an EvaluationPoint; return ``(s, 1 - s)``."""
    if isinstance(s, EvaluationPoint):
        return s.s, s.one_minus_s
    s = float(s)
    if s >= 1:
        raise PoleError("s must be < 1")
    if s < 0:
        raise InvalidArgumentError("s must be >= 0")
    return s, 1.0 - s


def _angles(angles):
    if isinstance(angles, EigenAngles):
        return angles.angles
    return np.asarray(angles, dtype=float)


def log_deriv_from_angles(angles, s) -> float | np.ndarray:
    """``Lambda'/Lambda(s)`` from the eigenangles (last axis = the N angles)."""
    s, u = _s_and_u(s)
    th = _angles(angles)
    c = np.cos(th)
    terms = (2.0 * s - 2.0 * c) / (s * s - 2.0 * s * c + 1.0)
    out = -1.0 / u + terms.sum(axis=-1)
    return out if np.ndim(out) else float(out)


def log_deriv_from_matrix(X, s) -> float:
    """``-trace(X^T (I - s X^T)^-1)`` through one LU factorisation."""
    s, _ = _s_and_u(s)
    M = X.entries if isinstance(X, SpecialOrthogonalMatrix) else np.asarray(X, dtype=float)
    Xt = M.T
    lu = lu_factor(np.eye(M.shape[0]) - s * Xt, check_finite=False)
    return -float(np.trace(lu_solve(lu, Xt, check_finite=False)))


def lorentzian_terms(th, s, u):
    """``1 / ((1-s)^2 + 4 s sin^2(theta/2))`` elementwise."""
    return 1.0 / (u * u + 4.0 * s * np.sin(0.5 * th) ** 2)


# Below this s the direct sum is used: the rewritten form divides by s,
# and the cancellation it avoids only occurs near s = 1.
DIRECT_FORM_BELOW = 0.5


def _direct_terms(th, s, u):
    c = np.cos(th)
    return -u * (2.0 * s - 2.0 * c) / (1.0 + s * s - 2.0 * s * c)


def pair_term(th, s, u):
    """Per-angle contribution ``phi(theta)`` with ``x = sum_j phi(theta_j)``.

    Uses ``phi = (s-1)/s * (1 + (s^2-1) f)``, f the Lorentzian factor.
    """
    if s < DIRECT_FORM_BELOW:
        return _direct_terms(th, s, u)
    f = lorentzian_terms(th, s, u)
    return -(u / s) * (1.0 - u * (1.0 + s) * f)


def scaled_ratio_x(angles, s):
    """``x = (s-1) sum_j (2s - 2cos theta_j) / (1 + s^2 - 2 s cos theta_j)``.

    Always lies in ``[2(s-1)N/(s+1), 2N]``.  Works on a batch: the last
    axis holds the angles of one matrix.
    """
    s, u = _s_and_u(s)
    th = _angles(angles)
    if s < DIRECT_FORM_BELOW:
        out = _direct_terms(th, s, u).sum(axis=-1)
    else:
        N = th.shape[-1]
        f = lorentzian_terms(th, s, u).sum(axis=-1)
        out = -(u / s) * (N - u * (1.0 + s) * f)
    return out if np.ndim(out) else float(out)


def scaled_ratio_bounds(N: int, s) -> tuple[float, float]:
    s, u = _s_and_u(s)
    return -2.0 * u * N / (1.0 + s), 2.0 * N
