"""Haar-distributed SO(2N+1) matrices and their eigenangles.

Two independent samplers are provided:

* ``sample_haar_so`` draws the matrix itself (Gaussian fill, Householder
  QR, sign fix, reflection onto det = +1) and ``eigenangles_of`` reads
  the angles off the symmetric part ``(X + X^T) / 2``;
* ``sample_angles_mcmc`` / ``mcmc_angle_draws`` sample the angles
  directly from the joint density on [0, pi]^N,

    p(theta) ∝ prod_{j<k} (cos theta_k - cos theta_j)^2 prod_m sin^2(theta_m / 2),

  by coordinate-wise random-walk Metropolis with reflection at 0 and pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import InvalidArgumentError, NumericalDegeneracyError
from .rng import RngStream, as_generator

ORTHO_TOL = 1e-10
PAIR_TOL = 1e-6
# Angles below this cannot be resolved through cos(theta) in double precision.
DEGENERATE_ANGLE = 1e-6
# Beyond pi the reflected random walk is already close to uniform on [0, pi].
MAX_WIDTH = math.pi


def _check_N(N) -> int:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidArgumentError(f"N must be a positive integer, got {N!r}")
    return int(N)


@dataclass(frozen=True)
class SpecialOrthogonalMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 != 1:
            raise InvalidArgumentError("SO(2N+1) matrices must be square of odd dimension")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_pairs(self) -> int:
        return (self.dim - 1) // 2

    def check(self, tol: float = ORTHO_TOL) -> None:
        """Assert orthogonality, unit determinant and the fixed eigenvalue 1."""
        X = self.entries
        err = np.max(np.abs(X.T @ X - np.eye(self.dim)))
        if err > tol:
            raise NumericalDegeneracyError(f"not orthogonal: |X^T X - I|_max = {err:.3e}")
        det = np.linalg.det(X)
        if abs(det - 1.0) > 1e-8:
            raise NumericalDegeneracyError(f"det(X) = {det!r}")
        w = np.linalg.eigvalsh(0.5 * (X + X.T))
        if abs(w[-1] - 1.0) > 1e-8:
            raise NumericalDegeneracyError("no eigenvalue 1 in the symmetric part")


@dataclass(frozen=True)
class EigenAngles:
    """The N angles in (0, pi] of one SO(2N+1) matrix, sorted ascending."""

    angles: np.ndarray
    degenerate: bool = field(default=False)

    def __post_init__(self):
        a = np.sort(np.asarray(self.angles, dtype=float).ravel())
        if a.size < 1:
            raise InvalidArgumentError("need at least one angle")
        if np.any(a < 0) or np.any(a > math.pi):
            raise InvalidArgumentError("angles must lie in [0, pi]")
        object.__setattr__(self, "angles", a)
        if not self.degenerate and a[0] <= DEGENERATE_ANGLE:
            object.__setattr__(self, "degenerate", True)

    @property
    def n_pairs(self) -> int:
        return self.angles.size

    def spectrum(self) -> np.ndarray:
        """Full spectrum ``{1} U {exp(+-i theta_j)}``."""
        z = np.exp(1j * self.angles)
        return np.concatenate([[1.0 + 0j], z, z.conj()])


def _haar_o(dim: int, gen: np.random.Generator) -> tuple[np.ndarray, int]:
    """Haar O(dim) sample and the exact sign of its determinant."""
    A = gen.standard_normal((dim, dim))
    qr, tau, work, info = lapack.dgeqrf(A)
    if info != 0:
        raise NumericalDegeneracyError(f"dgeqrf failed (info={info})")
    diag = np.diag(qr).copy()
    q, work, info = lapack.dorgqr(qr, tau)
    if info != 0:
        raise NumericalDegeneracyError(f"dorgqr failed (info={info})")
    signs = np.where(diag < 0, -1.0, 1.0)
    q *= signs[None, :]
    # Every reflector with tau != 0 has determinant -1.
    n_reflect = int(np.count_nonzero(tau))
    det_sign = (-1) ** n_reflect * int(np.prod(signs))
    return q, det_sign


def _haar_so_array(dim: int, gen: np.random.Generator) -> np.ndarray:
    q, det_sign = _haar_o(dim, gen)
    if det_sign < 0:
        q[:, -1] *= -1.0
    return q


def sample_haar_so(N: int, rng, check: bool = False) -> SpecialOrthogonalMatrix:
    """Haar-distributed element of SO(2N+1).

    Gaussian fill, Householder QR, columns of Q multiplied by the signs of
    diag(R) (Haar on O(2N+1)), then the last column negated when det = -1.
    """
    N = _check_N(N)
    X = SpecialOrthogonalMatrix(_haar_so_array(2 * N + 1, as_generator(rng)))
    if check:
        X.check()
    return X


def _angles_from_symmetric_eigs(w: np.ndarray, N: int) -> np.ndarray:
    """Angles from the ascending eigenvalues of (X + X^T)/2 (last axis)."""
    # The largest eigenvalue is (a copy of) the fixed 1.
    rest = w[..., :-1]
    lo, hi = rest[..., 0::2], rest[..., 1::2]
    gap = np.abs(hi - lo)
    if np.any(gap > PAIR_TOL):
        raise NumericalDegeneracyError(f"eigenvalue pairing failed (max gap {gap.max():.3e})")
    c = np.clip(0.5 * (lo + hi), -1.0, 1.0)
    return np.arccos(c)[..., ::-1]


def eigenangles_of(X) -> EigenAngles:
    """Eigenangles of an SO(2N+1) matrix via the symmetric part.

    ``(X + X^T) / 2`` has eigenvalues ``cos theta`` (each twice) and 1; one
    copy of 1 is removed and one representative per pair kept.
    """
    M = X.entries if isinstance(X, SpecialOrthogonalMatrix) else np.asarray(X, dtype=float)
    dim = M.shape[0]
    if M.ndim != 2 or dim != M.shape[1] or dim % 2 != 1:
        raise InvalidArgumentError("expected a square matrix of odd dimension")
    N = (dim - 1) // 2
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    if abs(w[-1] - 1.0) > 1e-6:
        raise NumericalDegeneracyError("symmetric part has no eigenvalue 1")
    th = _angles_from_symmetric_eigs(w, N)
    return EigenAngles(th)


def haar_angle_batch(N: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """``(count, N)`` array of sorted eigenangles of independent Haar samples."""
    N = _check_N(N)
    dim = 2 * N + 1
    out = np.empty((count, N))
    for i in range(count):
        X = _haar_so_array(dim, gen)
        w = np.linalg.eigvalsh(0.5 * (X + X.T))
        out[i] = _angles_from_symmetric_eigs(w, N)
    if np.any(out[:, 0] <= DEGENERATE_ANGLE):
        raise NumericalDegeneracyError("sampled an eigenangle indistinguishable from 0")
    return out


# ---------------------------------------------------------------------------
# Direct sampling of the joint density


def log_density(theta) -> np.ndarray:
    """Unnormalised log joint density; ``-inf`` on Vandermonde zeros."""
    th = np.atleast_2d(np.asarray(theta, dtype=float))
    c = np.cos(th)
    diff = np.abs(c[:, :, None] - c[:, None, :])
    iu = np.triu_indices(th.shape[1], k=1)
    with np.errstate(divide="ignore"):
        vdm = 2.0 * np.sum(np.log(diff[:, iu[0], iu[1]]), axis=1)
        rep = 2.0 * np.sum(np.log(np.sin(0.5 * th)), axis=1)
    return vdm + rep


def _reflect(t):
    y = np.mod(t, 2.0 * math.pi)
    return np.where(y > math.pi, 2.0 * math.pi - y, y)


def _sweep(theta, width, gen):
    """One Metropolis sweep over every coordinate of every chain (in place)."""
    C, N = theta.shape
    accepted = 0
    for m in range(N):
        old = theta[:, m]
        new = _reflect(old + width * gen.standard_normal(C))
        c_old, c_new = np.cos(old), np.cos(new)
        others = np.cos(np.delete(theta, m, axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = 2.0 * (np.log(np.abs(others - c_new[:, None])).sum(axis=1)
                       - np.log(np.abs(others - c_old[:, None])).sum(axis=1))
            d += 2.0 * (np.log(np.sin(0.5 * new)) - np.log(np.sin(0.5 * old)))
        d = np.where(np.isnan(d), -np.inf, d)
        u = gen.random(C)
        with np.errstate(divide="ignore"):
            acc = np.log(u) < d
        theta[acc, m] = new[acc]
        accepted += int(acc.sum())
    return accepted / (C * N)


def _initial_state(N, chains, gen):
    # Random start spread like the eigenangles: sorted uniforms on (0, pi).
    return np.sort(gen.uniform(0.05, math.pi, size=(chains, N)), axis=1)


def tune_width(N: int, rng, chains: int = 256, rounds: int = 30, target=(0.2, 0.5)) -> float:
    """Random-walk width giving an acceptance rate inside ``target``."""
    N = _check_N(N)
    gen = as_generator(rng)
    width = 1.5 / N
    theta = _initial_state(N, chains, gen)
    for _ in range(10):
        _sweep(theta, width, gen)
    rate = None
    for _ in range(rounds):
        rate = np.mean([_sweep(theta, width, gen) for _ in range(4)])
        if target[0] <= rate <= target[1]:
            return width
        if rate > target[1] and width >= MAX_WIDTH:
            # Flat density (small N): even a near-uniform proposal is accepted often.
            return MAX_WIDTH
        width = min(MAX_WIDTH, width * math.exp(2.0 * (rate - 0.35)))
    raise NumericalDegeneracyError(f"could not tune the MCMC width for N={N} (rate {rate:.3f})")


_WIDTHS: dict[int, float] = {}


def mcmc_width(N: int) -> float:
    """Tuned proposal width; computed once per N from a fixed tuning stream."""
    if N not in _WIDTHS:
        _WIDTHS[N] = tune_width(N, RngStream(0x5EED, 7919 + N))
    return _WIDTHS[N]


def default_burn_in(N: int) -> int:
    return 200 + 60 * N


def mcmc_angle_draws(N: int, n_draws: int, rng, burn_in: int | None = None,
                     draws_per_chain: int = 1, width: float | None = None) -> np.ndarray:
    """``(n_draws, N)`` sorted angle vectors from independent vectorised chains.

    Each chain is burnt in for ``burn_in`` sweeps and then yields
    ``draws_per_chain`` states separated by ``2N`` sweeps.
    """
    N = _check_N(N)
    if n_draws < 1:
        raise InvalidArgumentError("n_draws must be positive")
    gen = as_generator(rng)
    burn_in = default_burn_in(N) if burn_in is None else int(burn_in)
    if burn_in < 0 or draws_per_chain < 1:
        raise InvalidArgumentError("burn_in >= 0 and draws_per_chain >= 1 required")
    width = mcmc_width(N) if width is None else width
    chains = -(-n_draws // draws_per_chain)
    theta = _initial_state(N, chains, gen)
    for _ in range(burn_in):
        _sweep(theta, width, gen)
    draws = []
    for k in range(draws_per_chain):
        if k:
            for _ in range(2 * N):
                _sweep(theta, width, gen)
        draws.append(np.sort(theta, axis=1))
    out = np.stack(draws, axis=1).reshape(-1, N)[:n_draws]
    return out


def sample_angles_mcmc(N: int, steps: int, burn_in: int, rng) -> EigenAngles:
    """One draw from the joint density after ``burn_in`` sweeps.

    The chain runs ``steps`` sweeps in total; the state at the last
    thinning boundary (every ``2N`` sweeps after burn-in) is returned.
    """
    N = _check_N(N)
    if not (isinstance(steps, (int, np.integer)) and isinstance(burn_in, (int, np.integer))):
        raise InvalidArgumentError("steps and burn_in must be integers")
    if not steps > burn_in >= 0:
        raise InvalidArgumentError("requires steps > burn_in >= 0")
    gen = as_generator(rng)
    width = mcmc_width(N)
    theta = _initial_state(N, 1, gen)
    thin = 2 * N
    last = burn_in + ((steps - burn_in) // thin) * thin
    if last == burn_in:
        last = steps
    for _ in range(last):
        _sweep(theta, width, gen)
    return EigenAngles(theta[0])
