"""Acceptance criteria, each at its stated tolerance.

Every test logs one PASS/FAIL line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""
from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ghost_spectra.calibration import SphericalKernel, cov_approximant, mean_approximant, residue_m1_spherical
from ghost_spectra.ghost import gamma_scalar_closed_form
from ghost_spectra.harness.config import ExperimentConfig, PhaseSpec
from ghost_spectra.harness.experiments import phase_summary, run_phase, run_size, simulate_null
from ghost_spectra.harness.validation import (check_corr_boundary, check_mp_closed_form,
                                              check_mp_round_trip, check_poisson, quadform_cases)
from ghost_spectra.models import preset, sample_block_dataset
from ghost_spectra.mp import DiscreteLaw
from ghost_spectra.rng import SeedSpec
from ghost_spectra.sphericity import john_test

pytestmark = pytest.mark.acceptance

SEED = 20240601


@pytest.fixture(scope="module")
def size_table():
    cfg = ExperimentConfig(kind="size", models=("M1", "M2", "M4", "M6"), p_grid=(200,),
                           reps=2000, level=0.05, seed=SEED)
    return run_size(cfg)


def test_criterion_01_size_table(size_table, criterion_log):
    def rate(model, method):
        return size_table.value(model=model, method=method, metric="rejection_rate")

    checks = {
        "M1 corrected": (rate("M1", "corrected"), 0.03, 0.07),
        "M2 gaussian": (rate("M2", "gaussian"), 0.14, 0.21),
        "M2 corrected": (rate("M2", "corrected"), 0.035, 0.075),
        "M4 gaussian": (rate("M4", "gaussian"), 0.99, 1.0),
        "M4 corrected": (rate("M4", "corrected"), 0.04, 0.09),
        "M6 corrected": (rate("M6", "corrected"), 0.035, 0.08),
    }
    ok = {k: lo <= v <= hi for k, (v, lo, hi) in checks.items()}
    detail = ", ".join(f"{k} {v:.4f}" for k, (v, _, _) in checks.items())
    criterion_log.record(1, "size table", all(ok.values()), detail)
    assert all(ok.values()), detail


def test_criterion_02_m2_moments(size_table, criterion_log):
    mean = size_table.value(model="M2", method="john", metric="mean_nU")
    se = size_table.value(model="M2", method="john", metric="se_mean_nU")
    var = size_table.value(model="M2", method="john", metric="var_nU")
    passed = abs(mean - 199.0) <= 3 * se and 3.3 <= var <= 4.7
    detail = f"mean nU {mean:.4f} (target 199, 3 SE = {3 * se:.4f}), variance {var:.4f}"
    criterion_log.record(2, "M2 nU moments", passed, detail)
    assert passed, detail


def test_criterion_03_calibration_vs_exact_moments(criterion_log):
    c, n = 0.5, 400
    H = DiscreteLaw.point()
    m4 = gamma_scalar_closed_form(preset("M4", 200).gamma_params())
    errs = {"M0(f1)": 0.0, "M0(f2)": 0.0, "M0+M1(f2)": 0.0, "V0+V1(f1,f1)": 0.0}
    for gamma in (-400.0, 0.0, m4):
        k = SphericalKernel(gamma)
        M0x, _ = mean_approximant("f1", c, H, k, n)
        M0, M1 = mean_approximant("f2", c, H, k, n)
        V0, V1 = cov_approximant("f1", "f1", c, H, k, n)
        errs["M0(f1)"] = max(errs["M0(f1)"], abs(M0x))
        errs["M0(f2)"] = max(errs["M0(f2)"], abs(M0 - c))
        errs["M0+M1(f2)"] = max(errs["M0+M1(f2)"], abs(M0 + M1 - (c + gamma / n)))
        errs["V0+V1(f1,f1)"] = max(errs["V0+V1(f1,f1)"], abs(V0 + V1 - (2 * c + gamma / n)))
    tols = {"M0(f1)": 1e-8, "M0(f2)": 1e-6, "M0+M1(f2)": 1e-5, "V0+V1(f1,f1)": 1e-4}
    passed = all(errs[k] < tols[k] for k in tols)
    detail = ", ".join(f"{k} err {v:.1e}" for k, v in errs.items())
    criterion_log.record(3, "calibration moments", passed, detail)
    assert passed, detail


def test_criterion_04_residue_agreement(criterion_log):
    c, n = 0.5, 400
    H = DiscreteLaw.point()
    r1 = residue_m1_spherical("f1", c)
    r2 = residue_m1_spherical("f2", c)
    worst = 0.0
    for f in ("f1", "f2", "x3", "x4"):
        gamma = 123.0
        _, M1 = mean_approximant(f, c, H, SphericalKernel(gamma), n)
        worst = max(worst, abs(residue_m1_spherical(f, c) * gamma / n - M1))
    flipped = residue_m1_spherical("f2", c, reverse_orientation=True)
    passed = r1 == 0.0 and abs(r2 - 1.0) < 1e-14 and worst < 1e-6 and flipped == -r2
    detail = f"f1 {r1:g}, f2 {r2:.15g}, max |residue - quadrature| {worst:.1e}, flag gives {flipped:g}"
    criterion_log.record(4, "residue agreement", passed, detail)
    assert passed, detail


def test_criterion_05_mp_solver(criterion_log):
    closed = check_mp_closed_form()
    trip = check_mp_round_trip()
    passed = closed.passed and trip.passed
    criterion_log.record(5, "mp solver", passed, f"{closed.detail}; {trip.detail}")
    assert passed


def _quadform_errors():
    err_finite = err_diag = err_dense = 0.0
    for label, orc in quadform_cases(SEED):
        err_finite = max(err_finite, abs(orc.lhs - orc.rhs_finite))
        if label.startswith("diagonal"):
            err_diag = max(err_diag, abs(orc.lhs - orc.rhs))
        else:
            err_dense = max(err_dense, abs(orc.lhs - orc.rhs))
    return err_finite, err_diag, err_dense


def test_criterion_06_quadform_exact_oracle(criterion_log):
    err_finite, err_diag, _ = _quadform_errors()
    passed = err_finite <= 1e-12 and err_diag <= 1e-12
    detail = (f"20 dense + 20 diagonal pairs at p=4 and p=6: max err {err_finite:.1e} against "
              f"the exact finite-p kernel, {err_diag:.1e} against the block kernel on diagonal pairs")
    criterion_log.record(6, "quadform enumeration", passed, detail)
    assert passed, detail


@pytest.mark.xfail(strict=True, reason="the limiting block kernel omits the O(p^-delta) "
                   "radial terms tr(A_j B_j) + tr(A_j B_j^T) + nu4 sum A_ii B_ii that dense "
                   "pairs excite; see the decisions ledger")
def test_criterion_06_quadform_literal_block_kernel_dense_pairs(criterion_log):
    _, _, err_dense = _quadform_errors()
    passed = err_dense <= 1e-12
    criterion_log.record(6, "quadform literal kernel, dense pairs", passed,
                         f"max |lhs - (gaussian + block kernel)| = {err_dense:.4g} on dense pairs")
    assert passed


def test_criterion_07_poisson_spike(criterion_log):
    res = check_poisson(reps=5000, seed=SEED)
    criterion_log.record(7, "poisson spike", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_08_phase_transition(criterion_log):
    cfg = ExperimentConfig(kind="phase", p_grid=(100, 200, 400, 800), reps=3000, seed=SEED,
                           phase=PhaseSpec(alpha=1.0, tau=1.0, c=0.5, phi_grid=(0.6, 1.5)))
    summary = {s.phi: s for s in phase_summary(run_phase(cfg))}
    sup, sub = summary[1.5], summary[0.6]
    passed = (abs(sup.slope_raw - 0.5) <= 0.25 and sup.rescaled_ratio < 2.0
              and sub.raw_ratio < 3.0)
    detail = (f"phi=1.5 slope {sup.slope_raw:.3f}, rescaled max/min {sup.rescaled_ratio:.3f}; "
              f"phi=0.6 raw max/min {sub.raw_ratio:.3f}")
    criterion_log.record(8, "phase transition", passed, detail)
    assert passed, detail


def test_criterion_09_gamma_hat_and_invariance(criterion_log):
    cfg = ExperimentConfig(kind="size", models=("M4",), p_grid=(200,), reps=200, seed=SEED)
    model = preset("M4", 200)
    out = simulate_null(model, cfg, "acceptance/gamma_hat")
    target = gamma_scalar_closed_form(model.gamma_params())
    rel = abs(out[:, 4].mean() - target) / target

    X = sample_block_dataset(model, SeedSpec(SEED, "acceptance/scale"))
    base = john_test(X)
    fields = ("U", "gamma_hat", "nu4_hat", "z_gaussian", "z_wy", "z_corrected",
              "p_gaussian", "p_wy", "p_corrected")
    worst = 0.0
    for sigma in (0.1, 1.0, 10.0):
        rep = john_test(sigma * X)
        for f in fields:
            a, b = getattr(base, f), getattr(rep, f)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    passed = rel <= 0.10 and worst <= 1e-10
    detail = (f"mean gamma_hat {out[:, 4].mean():.1f} vs {target:.1f} (rel err {rel:.3f}); "
              f"max relative change under scaling {worst:.1e}")
    criterion_log.record(9, "gamma_hat and scale invariance", passed, detail)
    assert passed, detail


def test_criterion_10_correlation_boundary(criterion_log):
    res = check_corr_boundary(1_000_000, SEED)
    criterion_log.record(10, "correlation boundary", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_11_thread_determinism(tmp_path, criterion_log):
    cfg = tmp_path / "m1m2.json"
    cfg.write_text(json.dumps({"kind": "size", "models": ["M1", "M2"], "p_grid": [50, 100],
                               "n_rule": {"factor": 2}, "reps": 200, "level": 0.05}))
    outputs = []
    for threads in ("1", "8"):
        out = tmp_path / f"size_{threads}.csv"
        subprocess.run([sys.executable, "-m", "ghost_spectra", "size", "--config", str(cfg),
                        "--seed", "42", "--threads", threads, "--out", str(out)], check=True)
        outputs.append(out.read_bytes())
    passed = outputs[0] == outputs[1] and len(outputs[0]) > 0
    criterion_log.record(11, "thread determinism", passed,
                         f"{len(outputs[0])} bytes, identical: {outputs[0] == outputs[1]}")
    assert passed
