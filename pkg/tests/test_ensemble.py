import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from rmtlab import ensemble, kernels
from rmtlab.ensemble import (EigenAngles, SpecialOrthogonalMatrix, eigenangles_of, haar_angle_batch,
                             mcmc_angle_draws, sample_angles_mcmc, sample_haar_so)
from rmtlab.errors import InvalidArgumentError, NumericalDegeneracyError
from rmtlab.logderiv import log_deriv_from_angles, log_deriv_from_matrix
from rmtlab.quadrature import QuadratureRule, integrate_1d
from rmtlab.rng import RngStream


def rotation_block(phi):
    X = np.eye(3)
    X[:2, :2] = [[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]]
    return X


@pytest.mark.parametrize("N", [1, 5, 50, 200])
def test_haar_sample_invariants(N):
    X = sample_haar_so(N, RngStream(7, N), check=True)
    M = X.entries
    assert X.dim == 2 * N + 1
    assert np.max(np.abs(M.T @ M - np.eye(X.dim))) <= 1e-10
    assert abs(np.linalg.det(M) - 1.0) <= 1e-8
    w, v = np.linalg.eigh(0.5 * (M + M.T))
    assert abs(w[-1] - 1.0) <= 1e-8


def test_det_sign_fix_covers_both_cosets():
    # Both O^+ and O^- come out of the QR step; all returned matrices have det 1.
    gen = RngStream(3).generator()
    raw = [ensemble._haar_o(5, gen)[1] for _ in range(200)]
    assert set(raw) == {-1, 1}
    gen = RngStream(3).generator()
    for _ in range(200):
        assert np.linalg.det(ensemble._haar_so_array(5, gen)) > 0


def test_sample_rejects_bad_N():
    for bad in (0, -1, 2.5, True):
        with pytest.raises(InvalidArgumentError):
            sample_haar_so(bad, RngStream(1))


def test_determinism_same_stream():
    a = sample_haar_so(6, RngStream(99, 4)).entries
    b = sample_haar_so(6, RngStream(99, 4)).entries
    c = sample_haar_so(6, RngStream(99, 5)).entries
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rotation_block_angle():
    ang = eigenangles_of(rotation_block(1.0))
    assert ang.angles == pytest.approx([1.0], abs=1e-12)
    assert not ang.degenerate


def test_identity_flagged_degenerate():
    ang = eigenangles_of(np.eye(7))
    assert np.allclose(ang.angles, 0.0, atol=1e-6)
    assert ang.degenerate


def test_pairing_failure_raises():
    X = np.diag([1.0, 1.0, 1.0, -1.0, 0.0])
    X[3, 4], X[4, 3] = 0.5, 0.1  # not orthogonal: no valid pairing
    with pytest.raises(NumericalDegeneracyError):
        eigenangles_of(X)


def test_spectrum_product_is_one():
    ang = eigenangles_of(sample_haar_so(8, RngStream(5)))
    spec = ang.spectrum()
    assert abs(np.prod(spec) - 1.0) <= 1e-12
    assert np.all(np.diff(ang.angles) >= 0)
    assert np.all((ang.angles > 0) & (ang.angles <= math.pi))


def test_angles_match_general_eigensolver():
    X = sample_haar_so(6, RngStream(11)).entries
    z = np.linalg.eigvals(X)
    ref = np.sort(np.abs(np.angle(z[np.imag(z) > 1e-9])))
    assert eigenangles_of(X).angles == pytest.approx(ref, abs=1e-9)


def test_cross_path_oracle_N8():
    X = sample_haar_so(8, RngStream(21))
    a = log_deriv_from_angles(eigenangles_of(X), 0.5)
    b = log_deriv_from_matrix(X, 0.5)
    assert abs(a - b) <= 1e-8


def test_mean_trace_is_zero():
    N, M = 10, 4000
    ang = haar_angle_batch(N, M, RngStream(31).generator())
    tr = 1 + 2 * np.cos(ang).sum(axis=1)
    oracle = 1 + integrate_1d(lambda t: 2 * np.cos(t) * kernels.r1(N, t), 0, math.pi)
    assert abs(oracle) < 1e-12
    assert abs(tr.mean() - oracle) <= 4 * tr.std(ddof=1) / math.sqrt(M)


def _bin_probs(N, edges):
    return np.array([integrate_1d(lambda t: kernels.r1(N, t), a, b, QuadratureRule(panels=8)) / N
                     for a, b in zip(edges[:-1], edges[1:])])


def test_mcmc_N1_density():
    # N = 1: the density is (2/pi) sin^2(theta/2).
    draws = mcmc_angle_draws(1, 100_000, RngStream(41))[:, 0]
    edges = np.linspace(0, math.pi, 51)
    counts, _ = np.histogram(draws, edges)
    cdf = lambda t: (t - np.sin(t)) / math.pi
    p = np.diff(cdf(edges))
    assert stats.chisquare(counts, counts.sum() * p / p.sum()).pvalue > 1e-3
    v = 2 * np.cos(draws)
    assert abs(v.mean() + 1.0) <= 4 * v.std(ddof=1) / math.sqrt(v.size)


def test_mcmc_N5_one_point_density():
    draws = mcmc_angle_draws(5, 20_000, RngStream(43))
    edges = np.linspace(0, math.pi, 51)
    counts, _ = np.histogram(draws.ravel(), edges)
    p = _bin_probs(5, edges)
    assert stats.chisquare(counts, counts.sum() * p / p.sum()).pvalue > 1e-3


@pytest.mark.parametrize("N", [1, 2, 3])
def test_qr_and_mcmc_agree(N):
    qr = haar_angle_batch(N, 10_000, RngStream(51, N).generator())
    mc = mcmc_angle_draws(N, 10_000, RngStream(52, N))
    for j in range(N):
        assert stats.ks_2samp(qr[:, j], mc[:, j]).pvalue > 1e-3


def test_mcmc_width_in_band_or_capped():
    for N in (1, 3, 8):
        w = ensemble.mcmc_width(N)
        assert 0 < w <= ensemble.MAX_WIDTH
    theta = ensemble._initial_state(8, 256, RngStream(1).generator())
    rates = [ensemble._sweep(theta, ensemble.mcmc_width(8), RngStream(2).generator()) for _ in range(5)]
    assert 0.15 <= np.mean(rates) <= 0.55


def test_sample_angles_mcmc_contract():
    ang = sample_angles_mcmc(4, 400, 100, RngStream(61))
    assert isinstance(ang, EigenAngles)
    assert ang.angles.shape == (4,)
    assert np.all(np.diff(ang.angles) >= 0)
    with pytest.raises(InvalidArgumentError):
        sample_angles_mcmc(4, 100, 100, RngStream(61))
    with pytest.raises(InvalidArgumentError):
        sample_angles_mcmc(4, 100, -1, RngStream(61))


def test_log_density_vandermonde_zero():
    assert ensemble.log_density(np.array([1.0, 1.0])) == -np.inf


@given(st.lists(st.floats(0.01, math.pi - 0.01), min_size=2, max_size=6))
def test_log_density_permutation_invariant(th):
    th = np.array(th)
    assert ensemble.log_density(th) == pytest.approx(ensemble.log_density(th[::-1]), nan_ok=True, abs=1e-12) \
        or ensemble.log_density(th) == -np.inf


@given(st.integers(1, 12), st.integers(0, 2**32))
def test_eigenangle_invariants_property(N, seed):
    X = sample_haar_so(N, RngStream(seed))
    X.check()
    ang = eigenangles_of(X)
    assert ang.angles.shape == (N,)
    assert abs(np.prod(ang.spectrum()) - 1.0) <= 1e-10


def test_special_orthogonal_matrix_validation():
    with pytest.raises(InvalidArgumentError):
        SpecialOrthogonalMatrix(np.eye(4))
    bad = SpecialOrthogonalMatrix(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(NumericalDegeneracyError):
        bad.check()
