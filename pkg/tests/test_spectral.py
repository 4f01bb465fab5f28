from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghost_spectra.mp import DiscreteLaw
from ghost_spectra.spectral import SpectralSample, covariance_stats, empirical_stieltjes, lss_centered


@pytest.mark.parametrize("shape", [(5, 12), (12, 5), (7, 7)])
def test_traces_match_dense_covariance(shape):
    X = np.random.default_rng(0).standard_normal(shape)
    S = X @ X.T / shape[1]
    s = covariance_stats(X, want_eigen=True)
    assert s.L1 == pytest.approx(np.trace(S), rel=1e-13)
    assert s.L2 == pytest.approx(np.trace(S @ S), rel=1e-13)
    np.testing.assert_allclose(s.eigenvalues, np.linalg.eigvalsh(S), atol=1e-12)
    assert s.eigenvalues.shape == (shape[0],)


def test_identity_sample_has_l2_equal_p():
    p, n = 4, 8
    X = np.hstack([np.eye(p), np.eye(p)]) * 2.0  # X X^T / n = I
    s = covariance_stats(X)
    assert (s.L1, s.L2) == (4.0, 4.0)


def test_energies():
    X = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(covariance_stats(X).energies, [9.0, 17.0, 29.0])


@pytest.mark.parametrize("X", [np.zeros((0, 3)), np.array([[1.0, np.nan]]), np.ones(3)])
def test_rejects_bad_input(X):
    with pytest.raises(ValueError):
        covariance_stats(X)


def test_stieltjes_of_point_mass():
    assert empirical_stieltjes([1.0, 1.0], 2j) == pytest.approx(1.0 / (1.0 - 2j))
    with pytest.raises(ValueError):
        empirical_stieltjes([1.0], 0.5)


def test_lss_centered_two_point_law():
    # H = 0.5 delta_1 + 0.5 delta_2 has int t dH = 1.5 and int t^2 dH = 2.5
    H = DiscreteLaw.mixture([(1.0, 0.5), (2.0, 0.5)])
    p, c = 100, 0.5
    X = np.zeros((p, 10))
    X[:, 0] = 1.0
    s = covariance_stats(X)
    l1, l2 = lss_centered(s, c, H)
    assert l1 == pytest.approx(s.L1 - 1.5 * p)
    assert l2 == pytest.approx(s.L2 - p * (2.5 + c * 1.5**2))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 50.0))
def test_scale_covariance(scale):
    X = np.random.default_rng(1).standard_normal((6, 9))
    a, b = covariance_stats(X), covariance_stats(scale * X)
    assert b.L1 == pytest.approx(scale**2 * a.L1, rel=1e-12)
    assert b.L2 == pytest.approx(scale**4 * a.L2, rel=1e-12)


def test_lss_center_for_two_atom_population():
    H = DiscreteLaw.mixture([(2.0, 0.2), (1.0, 0.8)])
    p = 400
    s = SpectralSample(p=p, n=800, L1=0.0, L2=0.0, energies=np.ones(800))
    _, l2 = lss_centered(s, 0.5, H)
    assert -l2 == pytest.approx(2.32 * p)


@pytest.mark.slow
def test_lss_center_monte_carlo():
    # Gaussian rows: E tr S^2 = tr(Sigma^2)(1 + 1/n) + tr(Sigma)^2 / n
    p, n, reps = 400, 800, 40
    diag = np.where(np.arange(p) < 80, 2.0, 1.0)
    H = DiscreteLaw.from_values(diag)
    rng = np.random.default_rng(12)
    vals = []
    for _ in range(reps):
        X = np.sqrt(diag)[:, None] * rng.standard_normal((p, n))
        vals.append(lss_centered(covariance_stats(X), p / n, H)[1])
    vals = np.asarray(vals)
    exact = np.sum(diag**2) * (1 + 1 / n) + np.sum(diag) ** 2 / n - 2.32 * p
    assert abs(vals.mean() - exact) < 4 * vals.std(ddof=1) / np.sqrt(reps)
    assert exact == pytest.approx(0.8)
