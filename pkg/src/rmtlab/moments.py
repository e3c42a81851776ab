"""Monte Carlo estimators of the scaled moment, h and g.

The non-integer moment is taken as ``E[(1 + x)^K]``, i.e. the raw moment
``E[(Lambda'/Lambda)^K]`` times ``(s-1)^K``; the raw quantity is negative
near ``s = 1`` and has no real non-integer power.

Samples come from :func:`haar_angles`, which spreads the draws over
``workers`` independent streams ``RngStream(seed, w)`` and concatenates
them in worker order, so a fixed ``(seed, workers)`` is reproducible bit
for bit whatever the pool does.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import exact
from .ensemble import haar_angle_batch
from .errors import DomainError, InvalidArgumentError
from .logderiv import EvaluationPoint, lorentzian_terms, scaled_ratio_bounds, scaled_ratio_x
from .rng import RngStream
from .series import gen_binom, taylor_remainder_constant

MC_SIGMAS = 4.0


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    samples: int
    point: EvaluationPoint
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.stderr < 0 or self.samples < 2:
            raise InvalidArgumentError("stderr >= 0 and samples >= 2 required")

    def within(self, target: float, sigmas: float = MC_SIGMAS, slack: float = 0.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr + slack


class RunningMoments:
    """Welford accumulator with Chan's pairwise merge."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, values) -> "RunningMoments":
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return self
        other = RunningMoments()
        other.n = v.size
        other.mean = float(v.mean())
        other.m2 = float(np.sum((v - other.mean) ** 2))
        return self.merge(other)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.n) if self.n > 1 else 0.0


def _split(M, workers):
    base, extra = divmod(M, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _worker_angles(args):
    N, count, seed, w = args
    return haar_angle_batch(N, count, RngStream(seed, w).generator())


@lru_cache(maxsize=2)
def _haar_angles_cached(N, M, seed, workers):
    jobs = [(N, c, seed, w) for w, c in enumerate(_split(M, workers))]
    if workers == 1:
        chunks = [_worker_angles(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_worker_angles, jobs))
    out = np.concatenate(chunks, axis=0)
    out.setflags(write=False)
    return out


def haar_angles(N: int, M: int, seed: int, workers: int = 1) -> np.ndarray:
    """``(M, N)`` eigenangles of M Haar SO(2N+1) samples (cached per key)."""
    if int(M) != M or M < 2:
        raise InvalidArgumentError("need at least two samples")
    if int(workers) != workers or workers < 1:
        raise InvalidArgumentError("workers must be a positive integer")
    return _haar_angles_cached(int(N), int(M), int(seed), int(workers))


def clear_sample_cache():
    _haar_angles_cached.cache_clear()


def _estimate(values, point, seed, workers, M) -> MomentEstimate:
    acc = RunningMoments()
    for chunk in np.array_split(np.asarray(values), workers):
        acc.merge(RunningMoments().add(chunk))
    return MomentEstimate(acc.mean, acc.stderr, M, point, seed, workers)


def _x_samples(point, M, seed, workers, check_bounds=True):
    angles = haar_angles(point.N, M, seed, workers)
    x = scaled_ratio_x(angles, point)
    if check_bounds:
        lo, hi = scaled_ratio_bounds(point.N, point)
        tol = 1e-12 * max(1.0, abs(lo), hi)
        bad = np.flatnonzero((x < lo - tol) | (x > hi + tol))
        if bad.size:
            raise DomainError(f"sample {bad[0]} violates the homographic bounds: x = {x[bad[0]]!r}")
    return angles, x


def scaled_moment_mc(point: EvaluationPoint, M: int, seed: int, workers: int = 1) -> MomentEstimate:
    """Monte Carlo ``E[(1 + x)^K]`` at ``s = exp(-a/N)``."""
    point.require_feasible()
    if point.K == 0:
        return MomentEstimate(1.0, 0.0, M, point, seed, workers)
    _, x = _x_samples(point, M, seed, workers)
    base = 1.0 + x
    bad = np.flatnonzero(base <= 0)
    if bad.size:
        raise DomainError(f"1 + x <= 0 at sample {bad[0]} (x = {x[bad[0]]!r})")
    return _estimate(base**point.K, point, seed, workers, M)


def h_mc(n: int, point: EvaluationPoint, M: int, seed: int, workers: int = 1) -> MomentEstimate:
    """Monte Carlo ``h(n) = E[x^n]``."""
    if int(n) != n or n < 0:
        raise InvalidArgumentError("n must be a nonnegative integer")
    point.require_feasible()
    if n == 0:
        return MomentEstimate(1.0, 0.0, M, point, seed, workers)
    _, x = _x_samples(point, M, seed, workers)
    return _estimate(x ** int(n), point, seed, workers, M)


# Above this many ordered slot assignments g_mc falls back to one random
# assignment per sample.
_MAX_ASSIGNMENTS = 20_000


def g_mc(exponents, point: EvaluationPoint, M: int, seed: int, workers: int = 1) -> MomentEstimate:
    """Monte Carlo ``g(l) = E[prod_j f(theta_j)^{l_j}]``.

    The joint density is exchangeable, so each sample is symmetrised over
    all ordered choices of distinct angles for the exponent slots.
    """
    l = [int(e) for e in exponents]
    if not l or any(e < 1 for e in l):
        raise InvalidArgumentError("exponents must be positive integers")
    point.require_feasible()
    N, s, u = point.N, point.s, point.one_minus_s
    if len(l) > N:
        raise InvalidArgumentError("more exponent slots than angles")
    angles = haar_angles(N, M, seed, workers)
    f = lorentzian_terms(angles, s, u)
    n_assign = math.perm(N, len(l))
    if n_assign <= _MAX_ASSIGNMENTS:
        acc = np.zeros(M)
        for idx in itertools.permutations(range(N), len(l)):
            prod = np.ones(M)
            for slot, j in zip(l, idx):
                prod = prod * f[:, j] ** slot
            acc += prod
        values = acc / n_assign
    else:
        gen = RngStream(seed, 2**20 + workers).generator()
        order = np.argsort(gen.random((M, N)), axis=1)[:, :len(l)]
        values = np.ones(M)
        for slot, col in zip(l, order.T):
            values = values * f[np.arange(M), col] ** slot
    return _estimate(values, point, seed, workers, M)


g_exact_low = exact.g_exact_low


@dataclass
class ExpansionReport:
    """``sum_{n<=m} binom(K, n) h(n)`` and its attached remainder bound."""

    point: EvaluationPoint
    m: int
    value: float
    remainder_bound: float
    h: dict = field(default_factory=dict)
    h_stderr: dict = field(default_factory=dict)
    stderr: float = 0.0


def _check_m(m, K):
    if int(m) != m or m % 2 == 0 or m < max(3, math.floor(K)):
        raise InvalidArgumentError("m must be an odd integer >= max(3, floor(K))")
    return int(m)


def moment_via_h_expansion(point: EvaluationPoint, m: int, h_values: str | dict = "exact",
                           M: int = 100_000, seed: int = 0, workers: int = 1) -> ExpansionReport:
    """Truncated expansion of ``E[(1+x)^K]`` with remainder ``C_{K,m} h(m+1)``.

    ``h_values`` is "exact" (h(n <= 3) from the Gram route, MC above), "mc", or a
    mapping ``n -> value`` / ``n -> MomentEstimate`` covering 0..m+1.
    """
    point.require_feasible()
    m = _check_m(m, point.K)
    h, err = {}, {}
    for n in range(m + 2):
        if isinstance(h_values, dict):
            v = h_values[n]
        elif h_values == "exact" and n <= exact.MAX_EXACT_ORDER:
            v = exact.h_exact(n, point, method="gram")
        elif h_values in ("exact", "mc"):
            v = h_mc(n, point, M, seed, workers)
        else:
            raise InvalidArgumentError(f"unknown h_values {h_values!r}")
        if isinstance(v, MomentEstimate):
            h[n], err[n] = v.mean, v.stderr
        else:
            h[n], err[n] = float(v), 0.0
    K = point.K
    value = math.fsum(float(gen_binom(K, n)) * h[n] for n in range(m + 1))
    # Correlated MC errors add at most linearly.
    stderr = sum(abs(float(gen_binom(K, n))) * err[n] for n in range(m + 1))
    bound = taylor_remainder_constant(K, m) * h[m + 1]
    return ExpansionReport(point, m, value, bound, h, err, stderr)
