"""John's sphericity statistic and its three null calibrations."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .ghost import gamma_hat
from .spectral import SpectralSample, covariance_stats

TAILS = ("two-sided", "upper")


@dataclass(frozen=True)
class JohnReport:
    U: float
    Q: float
    gamma_hat: float
    nu4_hat: float
    z_gaussian: float
    z_wy: float
    z_corrected: float
    p_gaussian: float
    p_wy: float
    p_corrected: float
    p: int
    n: int
    tail: str = "two-sided"

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in asdict(self).items()}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def rejects(self, level: float) -> dict:
        return {"gaussian": self.p_gaussian < level, "wy": self.p_wy < level,
                "corrected": self.p_corrected < level}


def john_statistic(L1: float, L2: float, p: int, n: int) -> tuple:
    """``U = p L2 / L1^2 - 1`` and ``Q = n p U / 2``."""
    if L1 == 0:
        raise ValueError("tr(S) = 0; John's statistic is undefined")
    U = p * L2 / (L1 * L1) - 1.0
    return U, 0.5 * n * p * U


def wy_nu4_estimator(X) -> float:
    """Pooled studentized entrywise kurtosis ``mean(X^4) / mean(X^2)^2 - 3``."""
    X = np.asarray(X, dtype=float)
    if X.size < 2:
        raise ValueError("need at least two entries")
    x2 = X * X
    s2 = x2.mean()
    if s2 == 0:
        raise ValueError("all entries are zero")
    return float(np.mean(x2 * x2) / (s2 * s2) - 3.0)


def p_value(z, tail: str = "two-sided"):
    """Normal p-value of a z-score; ``nan`` propagates."""
    if tail == "two-sided":
        return 2.0 * norm.sf(np.abs(z))
    if tail == "upper":
        return norm.sf(z)
    raise ValueError(f"tail must be one of {TAILS}")


def john_z_scores(nU, p: int, gamma_hat_value, nu4_hat=np.nan) -> tuple:
    """Gaussian, Wang-Yao-type and corrected z-scores of ``n U``."""
    base = nU - p - 1.0
    return base / 2.0, (base - nu4_hat) / 2.0, (base - gamma_hat_value / p) / 2.0


def calibrate_all(sample: SpectralSample, X=None, tail: str = "two-sided",
                  studentize: bool = True) -> JohnReport:
    """Run John's test with the three calibrations.

    Parameters
    ----------
    sample : SpectralSample
        Output of :func:`~ghost_spectra.spectral.covariance_stats`.
    X : array_like, optional
        The ``p x n`` data, needed only for the entrywise fourth moment
        estimate; without it ``z_wy`` and ``p_wy`` are ``nan``.
    tail : {"two-sided", "upper"}
        Rejection region used for the p-values.
    studentize : bool
        Passed to :func:`~ghost_spectra.ghost.gamma_hat`.
    """
    p, n = sample.p, sample.n
    U, Q = john_statistic(sample.L1, sample.L2, p, n)
    g_hat = gamma_hat(sample.energies, p, studentize=studentize)
    nu4 = wy_nu4_estimator(X) if X is not None else math.nan
    zg, zw, zc = john_z_scores(n * U, p, g_hat, nu4)
    return JohnReport(
        U=U, Q=Q, gamma_hat=g_hat, nu4_hat=nu4,
        z_gaussian=float(zg), z_wy=float(zw), z_corrected=float(zc),
        p_gaussian=float(p_value(zg, tail)), p_wy=float(p_value(zw, tail)),
        p_corrected=float(p_value(zc, tail)), p=p, n=n, tail=tail,
    )


def john_test(X, tail: str = "two-sided", studentize: bool = True) -> JohnReport:
    """Convenience wrapper: ``p x n`` data in, :class:`JohnReport` out."""
    X = np.asarray(X, dtype=float)
    return calibrate_all(covariance_stats(X), X, tail=tail, studentize=studentize)


def corrected_from_q(Q: float, p: int, gamma_hat_value: float) -> float:
    """The corrected z-score written through ``Q``: ``(Q - (p^2 + p + gamma)/2) / p``."""
    return (Q - 0.5 * (p * p + p + gamma_hat_value)) / p


def critical_value(level: float, tail: str = "two-sided") -> float:
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    return float(norm.isf(level / 2.0 if tail == "two-sided" else level))


def reject(z, level: float, tail: str = "two-sided") -> Optional[bool]:
    crit = critical_value(level, tail)
    stat = np.abs(z) if tail == "two-sided" else z
    return stat > crit
