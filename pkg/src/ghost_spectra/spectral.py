"""Sample-covariance spectral statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mp import DiscreteLaw


@dataclass(frozen=True)
class SpectralSample:
    """Trace statistics of ``S = X X^T / n`` for one data matrix.

    ``L1 = tr(S)``, ``L2 = tr(S^2)``, ``energies[i] = ||r_i||^2``; the
    eigenvalues of ``S`` are kept (ascending, length ``p``) only on request.
    """

    p: int
    n: int
    L1: float
    L2: float
    energies: np.ndarray
    eigenvalues: Optional[np.ndarray] = None

    @property
    def c_n(self) -> float:
        return self.p / self.n


def covariance_stats(X, want_eigen: bool = False) -> SpectralSample:
    """Compute the spectral summary of a ``p x n`` data matrix.

    ``L2`` is the squared Frobenius norm of the smaller Gram matrix divided
    by ``n^2``, so ``S`` itself is never formed when ``p > n``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or min(X.shape) < 1:
        raise ValueError("X must be a nonempty 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    p, n = X.shape
    energies = np.einsum("ij,ij->j", X, X)
    L1 = float(energies.sum() / n)
    gram = X @ X.T if p <= n else X.T @ X
    L2 = float(np.einsum("ij,ij->", gram, gram) / n**2)
    eigenvalues = None
    if want_eigen:
        eig = np.linalg.eigvalsh(gram / n)
        eig = np.where((eig < 0) & (eig >= -1e-10 * max(1.0, eig[-1])), 0.0, eig)
        if p > n:
            eig = np.concatenate([np.zeros(p - n), eig])
        eigenvalues = eig
    return SpectralSample(p=p, n=n, L1=L1, L2=L2, energies=energies, eigenvalues=eigenvalues)


def empirical_stieltjes(eigenvalues, z) -> complex:
    """``(1/p) sum_j 1 / (lambda_j - z)`` for non-real ``z``."""
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must be off the real axis")
    lam = np.asarray(eigenvalues, dtype=float)
    if not np.all(np.isfinite(lam)):
        raise ValueError("eigenvalues must be finite")
    return complex(np.mean(1.0 / (lam - z)))


def lss_centered(sample: SpectralSample, c_n: float, H: DiscreteLaw) -> tuple:
    """Centered statistics ``(L(x), L(x^2))`` against the deterministic equivalent.

    The first two moments of ``F^{c,H}`` are ``int t dH`` and
    ``int t^2 dH + c (int t dH)^2``.
    """
    m1 = H.moment(1)
    m2 = H.moment(2)
    p = sample.p
    return sample.L1 - p * m1, sample.L2 - p * (m2 + c_n * m1**2)
