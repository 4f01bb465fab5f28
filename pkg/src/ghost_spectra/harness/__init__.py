"""Monte Carlo harness: configuration, experiments, validation and output."""
from .config import AlternativeSpec, ConfigError, ExperimentConfig, PhaseSpec, default_config
from .experiments import phase_summary, run, run_phase, run_power, run_size
from .table import ResultTable
from .validation import CheckResult, run_validate

__all__ = [
    "AlternativeSpec", "CheckResult", "ConfigError", "ExperimentConfig", "PhaseSpec",
    "ResultTable", "default_config", "phase_summary", "run", "run_phase", "run_power",
    "run_size", "run_validate",
]
