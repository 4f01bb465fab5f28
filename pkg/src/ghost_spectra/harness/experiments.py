"""Monte Carlo drivers for the size, power and phase experiments."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..ghost import gamma_scalar_closed_form, phase_indices
from ..models import (BlockModelConfig, BlockSpec, alternative_sigma_diag, model_from_dict,
                      sample_block_dataset)
from ..rng import SeedSpec
from ..spectral import covariance_stats
from ..sphericity import calibrate_all, critical_value
from .config import ExperimentConfig
from .parallel import ordered_map
from .table import ResultTable

METHODS = ("gaussian", "wy", "corrected")
_POWER_METRIC = re.compile(r"^power_a=(.+)$")


def stream_id(experiment_id: str, model: str, p: int) -> str:
    return f"{experiment_id}/{model}/p={p}"


def _z_and_stats(X, tail: str, studentize: bool) -> np.ndarray:
    report = calibrate_all(covariance_stats(X), X, tail=tail, studentize=studentize)
    return np.array([report.z_gaussian, report.z_wy, report.z_corrected,
                     report.n * report.U, report.gamma_hat])


def _rejection_stat(z: np.ndarray, tail: str) -> np.ndarray:
    return np.abs(z) if tail == "two-sided" else z


def simulate_null(model: BlockModelConfig, cfg: ExperimentConfig, sid: str) -> np.ndarray:
    """``(reps, 5)`` array of ``z_gaussian, z_wy, z_corrected, nU, gamma_hat``."""

    def one(r):
        X = sample_block_dataset(model, SeedSpec(cfg.seed, sid, r))
        return _z_and_stats(X, cfg.tail, cfg.studentize)

    return np.array(ordered_map(one, range(cfg.reps), cfg.threads))


def run_size(cfg: ExperimentConfig) -> ResultTable:
    """Null rejection rates of the three calibrations, plus moments of ``n U``."""
    if cfg.kind != "size":
        raise ValueError("run_size needs kind='size'")
    table = ResultTable()
    crit = critical_value(cfg.level, cfg.tail)
    for spec, name in zip(cfg.models, cfg.model_names):
        for p in cfg.p_grid:
            n = cfg.n_for(p)
            model = model_from_dict(spec, p, n)
            out = simulate_null(model, cfg, stream_id(cfg.experiment_id, name, p))
            row = dict(experiment_id=cfg.experiment_id, model=name, p=p, n=n,
                       reps=cfg.reps, seed=cfg.seed)
            for k, method in enumerate(METHODS):
                rate = np.mean(_rejection_stat(out[:, k], cfg.tail) > crit)
                table.add(method=method, metric="rejection_rate", value=rate, **row)
            nU, g_hat = out[:, 3], out[:, 4]
            gamma = gamma_scalar_closed_form(model.gamma_params())
            table.add(method="john", metric="mean_nU", value=nU.mean(), **row)
            table.add(method="john", metric="se_mean_nU",
                      value=nU.std(ddof=1) / math.sqrt(cfg.reps), **row)
            table.add(method="john", metric="var_nU", value=nU.var(ddof=1), **row)
            table.add(method="john", metric="center_nU", value=p + 1.0 + gamma / p, **row)
            table.add(method="gamma", metric="mean_gamma_hat", value=g_hat.mean(), **row)
            table.add(method="gamma", metric="closed_form", value=gamma, **row)
    return table


def run_power(cfg: ExperimentConfig) -> ResultTable:
    """Size-adjusted power along the ``a`` grid.

    Critical values are empirical upper ``1 - level`` quantiles of each
    null z-score from the ``:null`` stream.  The rejection region is upper
    tailed whatever ``cfg.tail`` says: every alternative inflates ``U``,
    while a two-sided cutoff around a biased null z would first lose power.
    The alternatives reuse one standardized draw per replicate (``:alt``
    stream) rescaled by ``sqrt(diag(Sigma_a))`` for every ``a``.
    """
    if cfg.kind != "power":
        raise ValueError("run_power needs kind='power'")
    alt = cfg.alternative
    table = ResultTable()
    for spec, name in zip(cfg.models, cfg.model_names):
        for p in cfg.p_grid:
            n = cfg.n_for(p)
            model = model_from_dict(spec, p, n)
            sid = stream_id(cfg.experiment_id, name, p)
            null = simulate_null(model, cfg, sid + ":null")
            crit = np.quantile(null[:, :3], 1.0 - cfg.level, axis=0)
            scales = [np.sqrt(alternative_sigma_diag(p, alt.fraction, a))[:, None]
                      for a in alt.a_grid]

            def one(r, model=model, sid=sid, scales=scales):
                W = sample_block_dataset(model, SeedSpec(cfg.seed, sid + ":alt", r))
                return np.array([_z_and_stats(W * s, cfg.tail, cfg.studentize)[:3]
                                 for s in scales])

            z_alt = np.array(ordered_map(one, range(cfg.reps), cfg.threads))
            rates = np.mean(z_alt > crit, axis=0)
            row = dict(experiment_id=cfg.experiment_id, model=name, p=p, n=n,
                       reps=cfg.reps, seed=cfg.seed)
            for k, method in enumerate(METHODS):
                table.add(method=method, metric="critical_value", value=crit[k], **row)
                for i, a in enumerate(alt.a_grid):
                    table.add(method=method, metric=power_metric(a), value=rates[i, k], **row)
    return table


def power_metric(a: float) -> str:
    return f"power_a={a:.6g}"


def parse_power_metric(metric: str) -> Optional[float]:
    match = _POWER_METRIC.match(metric)
    return float(match.group(1)) if match else None


def phase_model(p: int, phi: float, cfg: ExperimentConfig) -> BlockModelConfig:
    ph = cfg.phase
    block = BlockSpec(1.0, "gaussian", tau=ph.tau, delta=ph.delta(phi), alpha=ph.alpha)
    return BlockModelConfig(p=p, n=ph.n_for(p), blocks=(block,), name=phase_label(phi))


def phase_label(phi: float) -> str:
    return f"phi={phi:g}"


def run_phase(cfg: ExperimentConfig) -> ResultTable:
    """Raw and ``r_p``-rescaled variance of the centered ``L_n(x^2)``.

    With a single unit-variance block ``H`` is a point mass at one, so the
    centering is ``p (1 + c_n)``.
    """
    if cfg.kind != "phase":
        raise ValueError("run_phase needs kind='phase'")
    ph = cfg.phase
    table = ResultTable()
    for phi in ph.phi_grid:
        for p in cfg.p_grid:
            model = phase_model(p, phi, cfg)
            n = model.n
            sid = stream_id(cfg.experiment_id, model.name, p)

            def one(r, model=model, sid=sid):
                s = covariance_stats(sample_block_dataset(model, SeedSpec(cfg.seed, sid, r)))
                return s.L2 - s.p * (1.0 + s.c_n)

            stat = np.array(ordered_map(one, range(cfg.reps), cfg.threads))
            r_p = phase_indices([(ph.alpha, ph.delta(phi))], p).r_p
            raw = stat.var(ddof=1)
            row = dict(experiment_id=cfg.experiment_id, model=model.name, p=p, n=n,
                       reps=cfg.reps, seed=cfg.seed)
            table.add(method="raw", metric="mean", value=stat.mean(), **row)
            table.add(method="raw", metric="variance", value=raw, **row)
            table.add(method="rescaled", metric="variance", value=r_p**2 * raw, **row)
            table.add(method="scaling", metric="r_p", value=r_p, **row)
    return table


@dataclass(frozen=True)
class PhaseSummary:
    phi: float
    slope_raw: float
    raw_ratio: float
    rescaled_ratio: float


def phase_summary(table: ResultTable) -> list:
    """Log-log slope of the raw variance in ``p`` and max/min ratios per ``phi``."""
    out = []
    models = sorted({r.model for r in table.select(metric="variance")},
                    key=lambda m: float(m.split("=", 1)[1]))
    for label in models:
        raw = table.select(model=label, method="raw", metric="variance")
        res = table.select(model=label, method="rescaled", metric="variance")
        p = np.array([r.p for r in raw], dtype=float)
        v = np.array([r.value for r in raw])
        w = np.array([r.value for r in res])
        slope = float(np.polyfit(np.log(p), np.log(v), 1)[0]) if p.size > 1 else math.nan
        out.append(PhaseSummary(phi=float(label.split("=", 1)[1]), slope_raw=slope,
                                raw_ratio=float(v.max() / v.min()),
                                rescaled_ratio=float(w.max() / w.min())))
    return out


RUNNERS = {"size": run_size, "power": run_power, "phase": run_phase}


def run(cfg: ExperimentConfig) -> ResultTable:
    if cfg.kind not in RUNNERS:
        raise ValueError(f"no Monte Carlo runner for kind {cfg.kind!r}")
    return RUNNERS[cfg.kind](cfg)
