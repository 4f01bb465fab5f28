"""Fourth-order corrections for linear spectral statistics of sample
covariance matrices, with a corrected John sphericity test."""
from __future__ import annotations

from .calibration import (BlockKernel, ContourSpec, LssCalibration, SphericalKernel, calibrate,
                          cov_approximant, john_asymptotics, mean_approximant,
                          residue_m1_spherical)
from .ghost import (GammaBlockParams, PhaseIndices, corr_boundary_gamma, gamma_block,
                    gamma_block_finite, gamma_hat, gamma_scalar_closed_form, phase_indices,
                    quadform_cov_oracle)
from .models import (BlockModelConfig, BlockSpec, PRESETS, preset, sample_block_dataset,
                     sample_sphere_rows, sample_spike_dataset)
from .mp import ConvergenceError, DiscreteLaw, solve_companion, support_interval
from .rng import SeedSpec
from .spectral import SpectralSample, covariance_stats, empirical_stieltjes, lss_centered
from .sphericity import JohnReport, calibrate_all, john_statistic, john_test, wy_nu4_estimator

__version__ = "0.1.0"

__all__ = [
    "BlockKernel", "BlockModelConfig", "BlockSpec", "ContourSpec", "ConvergenceError",
    "DiscreteLaw", "GammaBlockParams", "JohnReport", "LssCalibration", "PRESETS",
    "PhaseIndices", "SeedSpec", "SpectralSample", "SphericalKernel", "calibrate",
    "calibrate_all", "corr_boundary_gamma", "cov_approximant", "covariance_stats",
    "empirical_stieltjes", "gamma_block", "gamma_block_finite", "gamma_hat",
    "gamma_scalar_closed_form", "john_asymptotics", "john_statistic", "john_test",
    "lss_centered", "mean_approximant", "phase_indices", "preset", "quadform_cov_oracle",
    "residue_m1_spherical", "sample_block_dataset", "sample_sphere_rows",
    "sample_spike_dataset", "solve_companion", "support_interval", "wy_nu4_estimator",
]
