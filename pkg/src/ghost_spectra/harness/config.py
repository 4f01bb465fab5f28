"""Experiment configuration and JSON loading."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

from ..models import model_from_dict, model_names
from ..rng import MASK64
from ..sphericity import TAILS

KINDS = ("size", "power", "phase", "validate", "calibrate", "test")
STATISTICAL_KINDS = ("size", "power", "phase")
DEFAULT_SEED = 20240601
DEFAULT_REPS = 2000
FULL_REPS = 10_000
DEFAULT_A_GRID = (1.0, 1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.35, 1.4, 1.5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlternativeSpec:
    """``Sigma = diag(a, ..., a, 1, ..., 1)`` with ``floor(fraction p)`` entries equal to ``a``."""

    fraction: float = 0.5
    a_grid: tuple = DEFAULT_A_GRID

    def __post_init__(self):
        object.__setattr__(self, "a_grid", tuple(float(a) for a in self.a_grid))
        if not 0 < self.fraction < 1:
            raise ConfigError("alternative.fraction must lie in (0, 1)")
        if not self.a_grid or any(a <= 0 or not math.isfinite(a) for a in self.a_grid):
            raise ConfigError("alternative.a_grid needs positive finite entries")


@dataclass(frozen=True)
class PhaseSpec:
    """One Gaussian block with ``delta = 2 alpha - phi`` for each ``phi`` in the grid."""

    alpha: float = 1.0
    tau: float = 1.0
    c: float = 0.5
    phi_grid: tuple = (0.6, 1.0, 1.5)

    def __post_init__(self):
        object.__setattr__(self, "phi_grid", tuple(float(v) for v in self.phi_grid))
        if not 0 <= self.alpha <= 1:
            raise ConfigError("phase.alpha must lie in [0, 1]")
        if self.tau <= 0 or self.c <= 0:
            raise ConfigError("phase.tau and phase.c must be positive")
        if not self.phi_grid:
            raise ConfigError("phase.phi_grid is empty")
        for phi in self.phi_grid:
            if 2.0 * self.alpha - phi <= 0:
                raise ConfigError(f"phi={phi} gives a nonpositive delta")

    def delta(self, phi: float) -> float:
        return 2.0 * self.alpha - phi

    def n_for(self, p: int) -> int:
        return max(2, int(round(p / self.c)))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "size"
    models: tuple = ("M1", "M2", "M3", "M4", "M5", "M6")
    p_grid: tuple = (200,)
    n_factor: float = 2.0
    reps: int = DEFAULT_REPS
    level: float = 0.05
    seed: int = DEFAULT_SEED
    threads: Optional[int] = None
    alternative: Optional[AlternativeSpec] = None
    phase: Optional[PhaseSpec] = None
    experiment_id: str = ""
    tail: str = "two-sided"
    studentize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "p_grid", tuple(int(p) for p in self.p_grid))
        if not self.experiment_id:
            object.__setattr__(self, "experiment_id", self.kind)
        if self.kind == "power" and self.alternative is None:
            object.__setattr__(self, "alternative", AlternativeSpec())
        if self.kind == "phase" and self.phase is None:
            object.__setattr__(self, "phase", PhaseSpec())
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.kind in STATISTICAL_KINDS and self.reps < 100:
            raise ConfigError("statistical experiments need reps >= 100")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.tail not in TAILS:
            raise ConfigError(f"tail must be one of {TAILS}")
        if self.n_factor <= 0:
            raise ConfigError("n_rule.factor must be positive")
        if not self.p_grid or min(self.p_grid) < 2:
            raise ConfigError("p_grid needs entries >= 2")
        if self.kind in ("size", "power"):
            if not self.models:
                raise ConfigError("models list is empty")
            for spec in self.models:
                for p in self.p_grid:
                    try:
                        model_from_dict(spec, p, self.n_for(p)).check_radial()
                    except (KeyError, TypeError, ValueError) as exc:
                        raise ConfigError(f"model {spec!r} at p={p}: {exc}") from exc

    def n_for(self, p: int) -> int:
        return max(2, int(round(self.n_factor * p)))

    @property
    def model_names(self) -> list:
        return model_names(self.models)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["models"] = list(self.models)
        out["p_grid"] = list(self.p_grid)
        out["n_rule"] = {"factor": out.pop("n_factor")}
        return out

    @classmethod
    def from_dict(cls, data: dict, **defaults) -> "ExperimentConfig":
        data = dict(data)
        kw = dict(defaults)
        known = {"kind", "models", "p_grid", "reps", "level", "seed", "threads",
                 "experiment_id", "tail", "studentize"}
        unknown = set(data) - known - {"n_rule", "alternative", "phase"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in known & set(data):
            kw[key] = data[key]
        if "n_rule" in data:
            rule = data["n_rule"]
            if not isinstance(rule, dict) or "factor" not in rule:
                raise ConfigError("n_rule must be an object with a 'factor'")
            kw["n_factor"] = float(rule["factor"])
        try:
            if data.get("alternative") is not None:
                kw["alternative"] = AlternativeSpec(**data["alternative"])
            if data.get("phase") is not None:
                kw["phase"] = PhaseSpec(**data["phase"])
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path, **defaults) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data, **defaults)


def default_config(kind: str, **kw) -> ExperimentConfig:
    """Desk-scale defaults for each experiment kind."""
    if kind == "power":
        kw.setdefault("models", ("M2", "M4"))
    if kind == "phase":
        kw.setdefault("p_grid", (100, 200, 400, 800))
        kw.setdefault("reps", 3000)
    return ExperimentConfig(kind=kind, **kw)

