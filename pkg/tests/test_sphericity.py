from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghost_spectra.ghost import gamma_hat
from ghost_spectra.models import BlockModelConfig, BlockSpec, preset, sample_block_dataset
from ghost_spectra.spectral import SpectralSample, covariance_stats
from ghost_spectra.sphericity import (calibrate_all, corrected_from_q, critical_value,
                                      john_statistic, john_test, john_z_scores, p_value, reject,
                                      wy_nu4_estimator)


def test_perfect_sphericity():
    assert john_statistic(10.0, 10.0, 10, 20) == (0.0, 0.0)


def test_mp_substitution():
    p, n = 50, 100
    U, Q = john_statistic(p, p * (1 + p / n), p, n)
    assert n * U == pytest.approx(p)
    assert Q == pytest.approx(n * p * U / 2)


def test_zero_trace_rejected():
    with pytest.raises(ValueError):
        john_statistic(0.0, 1.0, 3, 4)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_statistic_scale_invariance(s2):
    a = john_statistic(13.0, 21.0, 10, 20)[0]
    assert john_statistic(s2 * 13.0, s2**2 * 21.0, 10, 20)[0] == pytest.approx(a, rel=1e-12)


def test_wy_rademacher_exact():
    X = np.where(np.random.default_rng(0).random((20, 30)) < 0.5, -1.0, 1.0)
    assert wy_nu4_estimator(X) == -2.0
    assert wy_nu4_estimator(3.0 * X) == -2.0


def test_wy_gaussian_near_zero():
    X = np.random.default_rng(1).standard_normal((1000, 1000))
    # Var of the sample kurtosis of N(0,1) is about 24 / N
    assert abs(wy_nu4_estimator(X)) < 4 * math.sqrt(24 / X.size)


def test_wy_rejects_degenerate():
    with pytest.raises(ValueError):
        wy_nu4_estimator(np.zeros((3, 3)))


def test_centered_input_gives_zero_corrected():
    p, n = 10, 40
    T = np.array([8.0, 12.0, 9.0, 11.0])
    g = gamma_hat(T, p)
    # build L1, L2 so that n U = p + 1 + g / p
    U = (p + 1 + g / p) / n
    L1 = 7.0
    L2 = (U + 1.0) * L1**2 / p
    rep = calibrate_all(SpectralSample(p=p, n=n, L1=L1, L2=L2, energies=T))
    assert rep.z_corrected == pytest.approx(0.0, abs=1e-12)
    assert rep.p_corrected == pytest.approx(1.0)
    up = calibrate_all(SpectralSample(p=p, n=n, L1=L1, L2=L2, energies=T), tail="upper")
    assert up.p_corrected == pytest.approx(0.5)


def test_q_form_equivalence():
    X = sample_block_dataset(preset("M4", 40), 2)
    rep = john_test(X)
    assert corrected_from_q(rep.Q, rep.p, rep.gamma_hat) == pytest.approx(rep.z_corrected, rel=1e-10)


def test_missing_data_leaves_wy_nan():
    X = sample_block_dataset(preset("M1", 20), 0)
    rep = calibrate_all(covariance_stats(X))
    assert math.isnan(rep.z_wy) and math.isnan(rep.p_wy)
    assert json.loads(rep.to_json())["z_wy"] is None


@pytest.mark.parametrize("sigma", [0.1, 1.0, 10.0])
def test_full_pipeline_scale_invariance(sigma):
    X = sample_block_dataset(preset("M6", 60), 4)
    a, b = john_test(X), john_test(sigma * X)
    for name in ("U", "gamma_hat", "nu4_hat", "z_gaussian", "z_wy", "z_corrected"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-10, abs=1e-10)


def test_p_values_and_critical_values():
    assert p_value(0.0) == 1.0
    assert p_value(0.0, "upper") == 0.5
    assert critical_value(0.05) == pytest.approx(1.959963984540054)
    assert critical_value(0.05, "upper") == pytest.approx(1.6448536269514722)
    assert reject(2.0, 0.05) and not reject(-2.0, 0.05, "upper")
    with pytest.raises(ValueError):
        p_value(1.0, "lower")
    with pytest.raises(ValueError):
        critical_value(1.0)


def test_z_scores_formula():
    zg, zw, zc = john_z_scores(205.0, 200, 400.0, 1.0)
    assert (zg, zw, zc) == (2.0, 1.5, 1.0)


@pytest.mark.slow
def test_wy_and_corrected_agree_single_block_ic():
    cfg = BlockModelConfig(p=200, n=400, blocks=(BlockSpec(1.0, "t8"),))
    reports = [john_test(sample_block_dataset(cfg, r)) for r in range(500)]
    d = np.array([rep.z_wy - rep.z_corrected for rep in reports])
    assert abs(d.mean()) < 4 * d.std(ddof=1) / math.sqrt(d.size)
