from __future__ import annotations

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from ghost_spectra.calibration import (BlockKernel, CalibrationError, ContourSpec, SphericalKernel,
                                       as_polynomial, calibrate, cov_approximant, john_asymptotics,
                                       mean_approximant, residue_m1_spherical)
from ghost_spectra.models import preset
from ghost_spectra.mp import DiscreteLaw

NULL = DiscreteLaw.point()
C, N = 0.5, 400


@pytest.mark.parametrize("spec, coef", [("x2", [0, 0, 1]), ("f1", [0, 1]), ([1, 2], [1, 2]),
                                        (Polynomial([0, 0, 0, 1]), [0, 0, 0, 1])])
def test_as_polynomial(spec, coef):
    np.testing.assert_array_equal(as_polynomial(spec).coef, coef)


def test_as_polynomial_rejects():
    with pytest.raises(ValueError):
        as_polynomial("sin")
    with pytest.raises(ValueError):
        as_polynomial([0, 0, 0, 0, 0, 1])


def test_contour_must_clear_support():
    with pytest.raises(ValueError):
        mean_approximant("x", C, NULL, contour=ContourSpec(0.5, 3.0))


@pytest.mark.parametrize("gamma", [-400.0, 0.0, 2139.336])
def test_exact_moment_identities(gamma):
    k = SphericalKernel(gamma)
    M0, M1 = mean_approximant("x", C, NULL, k, N)
    assert abs(M0) < 1e-8 and abs(M1) < 1e-8
    M0, M1 = mean_approximant("x2", C, NULL, k, N)
    assert M0 == pytest.approx(C, abs=1e-6)
    assert M0 + M1 == pytest.approx(C + gamma / N, abs=1e-5)
    V0, V1 = cov_approximant("x", "x", C, NULL, k, N)
    assert V0 + V1 == pytest.approx(2 * C + gamma / N, abs=1e-4)


def test_gaussian_variance_of_trace_square():
    # Var L(x^2) under Gaussian data: 4c(2c^2 + 5c + 2) at c = 1/2 equals 10
    V0, V1 = cov_approximant("x2", "x2", C, NULL)
    assert V0 == pytest.approx(10.0, abs=1e-8)
    assert V1 == 0.0


def test_constant_function_has_zero_moments():
    M0, M1 = mean_approximant("1", C, NULL, SphericalKernel(10.0), N)
    assert abs(M0) < 1e-10 and abs(M1) < 1e-10


def test_block_kernel_matches_spherical_under_identity():
    cfg = preset("M4", 200)
    block = BlockKernel(cfg.gamma_params())
    sph = SphericalKernel(block.gamma_used)
    for f in ("x2", "x3"):
        assert mean_approximant(f, C, NULL, block, N)[1] == pytest.approx(
            mean_approximant(f, C, NULL, sph, N)[1], rel=1e-10)
    assert cov_approximant("x", "x2", C, NULL, block, N)[1] == pytest.approx(
        cov_approximant("x", "x2", C, NULL, sph, N)[1], rel=1e-10)


def test_node_refinement_is_stable():
    coarse = ContourSpec.around(C, NULL, nodes_per_side=128)
    fine = ContourSpec.around(C, NULL, nodes_per_side=1024)
    k = SphericalKernel(100.0)
    a = mean_approximant("x4", C, NULL, k, N, coarse)
    b = mean_approximant("x4", C, NULL, k, N, fine)
    np.testing.assert_allclose(a, b, atol=1e-11)


def test_nested_contours_required():
    inner = ContourSpec.around(C, NULL)
    with pytest.raises(ValueError):
        cov_approximant("x", "x", C, NULL, contours=(inner, inner))


def test_kernel_requires_n():
    with pytest.raises(ValueError):
        mean_approximant("x2", C, NULL, SphericalKernel(1.0))


@pytest.mark.parametrize("f, value", [("1", 0.0), ("x", 0.0), ("x2", 1.0), ("x3", 4.5), ("x4", 15.5)])
def test_residue_values(f, value):
    assert residue_m1_spherical(f, C) == pytest.approx(value, abs=1e-13)


@pytest.mark.parametrize("f", ["x2", "x3", "x4"])
@pytest.mark.parametrize("c", [0.3, 0.5, 2.0])
def test_residue_matches_quadrature(f, c):
    _, M1 = mean_approximant(f, c, NULL, SphericalKernel(float(N)), N)
    assert residue_m1_spherical(f, c) == pytest.approx(M1, abs=1e-6)


def test_reverse_orientation_flag_flips_correction():
    k = SphericalKernel(80.0)
    _, plus = mean_approximant("x2", C, NULL, k, N)
    _, minus = mean_approximant("x2", C, NULL, k, N, reverse_orientation=True)
    assert minus == pytest.approx(-plus)
    assert residue_m1_spherical("x2", C, reverse_orientation=True) == -1.0


def test_calibrate_bundle():
    res = calibrate("x", c_n=C, kernel=SphericalKernel(40.0), n=N)
    assert res.variance == pytest.approx(2 * C + 40.0 / N, abs=1e-8)
    assert res.mean == pytest.approx(0.0, abs=1e-8)


def test_john_asymptotics():
    assert john_asymptotics(200, 400, -400.0) == (199.0, 4.0, 0.5 * (40000 + 200 - 400), 40000.0)


def test_calibration_error_is_runtime_error():
    assert issubclass(CalibrationError, RuntimeError)
