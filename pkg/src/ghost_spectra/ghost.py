"""Fourth-order correction kernels, the scalar excess-energy parameter and
exact small-instance oracles."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class GammaBlockParams:
    """Parameters of the blockwise correction kernel.

    ``block_sizes[j]`` consecutive coordinates form block ``j``; each block
    carries a direction fourth cumulant ``nu4[j]`` and a radial variance
    ``tau[j] * p**(-delta[j])``.
    """

    p: int
    block_sizes: tuple
    nu4: tuple
    tau: tuple
    delta: tuple

    def __post_init__(self):
        for name in ("block_sizes", "nu4", "tau", "delta"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        k = len(self.block_sizes)
        if not (len(self.nu4) == len(self.tau) == len(self.delta) == k):
            raise ValueError("per-block parameter lengths disagree")
        if sum(self.block_sizes) != self.p or min(self.block_sizes) < 1:
            raise ValueError("block sizes must be positive and sum to p")
        if any(t < 0 for t in self.tau) or any(d <= 0 for d in self.delta):
            raise ValueError("tau must be >= 0 and delta > 0")

    @property
    def radial_variances(self) -> np.ndarray:
        return np.array([t * self.p ** (-d) for t, d in zip(self.tau, self.delta)])

    def slices(self):
        start = 0
        for size in self.block_sizes:
            yield slice(start, start + size)
            start += size

    def selector(self, j: int) -> np.ndarray:
        """Diagonal 0/1 indicator of block ``j``."""
        mask = np.zeros(self.p)
        mask[list(self.slices())[j]] = 1.0
        return np.diag(mask)


def _diagonal(M, p: int) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim == 1:
        if M.shape != (p,):
            raise ValueError(f"diagonal argument has length {M.shape[0]}, expected {p}")
        return M
    if M.shape != (p, p):
        raise ValueError(f"matrix argument has shape {M.shape}, expected ({p}, {p})")
    return np.diagonal(M)


def gamma_block(A, B, params: GammaBlockParams):
    """Blockwise correction kernel.

    ``sum_j nu4_j tr[(A o B) F_j] + sum_j tau_j p^-delta_j tr(A F_j) tr(B F_j)``.

    Both sectors only see the diagonals of ``A`` and ``B``, so either square
    matrices or their diagonals (1-D arrays) are accepted.  Complex input is
    allowed.
    """
    a = _diagonal(A, params.p)
    b = _diagonal(B, params.p)
    total = 0.0
    for sl, nu4, rv in zip(params.slices(), params.nu4, params.radial_variances):
        total = total + nu4 * np.sum(a[sl] * b[sl]) + rv * np.sum(a[sl]) * np.sum(b[sl])
    return total


def gamma_block_finite(A, B, params: GammaBlockParams):
    """Exact fourth-cumulant kernel of the block model at finite ``p``.

    With ``v_j = Var(rho_j^2)`` the exact cumulant tensor adds, on top of
    :func:`gamma_block`, ``v_j [nu4_j sum_i A_ii B_ii + tr(A_j B_j) + tr(A_j B_j^T)]``
    per block.  The extra terms are of lower order; for diagonal ``A, B`` and
    Rademacher directions (``nu4 = -2``) they cancel exactly.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    total = gamma_block(A, B, params)
    for sl, nu4, rv in zip(params.slices(), params.nu4, params.radial_variances):
        Aj, Bj = A[sl, sl], B[sl, sl]
        extra = nu4 * np.sum(np.diagonal(Aj) * np.diagonal(Bj))
        extra = extra + np.sum(Aj * Bj.T) + np.sum(Aj * Bj)
        total = total + rv * extra
    return total


def gamma_scalar_closed_form(params: GammaBlockParams) -> float:
    """``gamma_n = Gamma(I, I) = sum_j nu4_j p_j + sum_j tau_j p_j^2 p^-delta_j``."""
    sizes = np.asarray(params.block_sizes, dtype=float)
    return float(np.sum(np.asarray(params.nu4) * sizes)
                 + np.sum(params.radial_variances * sizes**2))


def gamma_hat(energies, p: int, studentize: bool = True) -> float:
    """Plug-in estimator of the excess energy fluctuation.

    Parameters
    ----------
    energies : array_like
        Squared norms ``T_i = ||r_i||^2`` of the ``n`` observations.
    p : int
        Dimension.
    studentize : bool
        Rescale energies to mean ``p`` first, which makes the estimator
        invariant to the data scale.  With ``False`` the raw
        ``mean((T - p)^2) - 2 p`` is returned.
    """
    T = np.asarray(energies, dtype=float)
    if T.ndim != 1 or T.size < 2:
        raise ValueError("need at least two energies")
    if studentize:
        mean = T.mean()
        if mean == 0:
            raise ValueError("zero mean energy cannot be studentized")
        T = p * T / mean
    return float(np.mean((T - p) ** 2) - 2.0 * p)


@dataclass(frozen=True)
class PhaseIndices:
    phi: tuple
    kappa: float
    r_p: float


def phase_indices(blocks: Sequence, p: Optional[int] = None) -> PhaseIndices:
    """Phase indices ``phi_j = 2 alpha_j - delta_j`` and the scaling ``r_p``.

    ``blocks`` is a sequence of ``(alpha, delta)`` pairs.  ``r_p`` is ``1``
    when ``max phi <= 1`` and ``p**((1 - max phi)/2)`` otherwise; it is left
    as ``nan`` in the supercritical case when ``p`` is not given.
    """
    phi = []
    for alpha, delta in blocks:
        if delta <= 0:
            raise ValueError("delta must be positive")
        phi.append(2.0 * alpha - delta)
    top = max(phi)
    if top <= 1.0:
        r_p = 1.0
    elif p is None:
        r_p = math.nan
    else:
        r_p = float(p) ** ((1.0 - top) / 2.0)
    return PhaseIndices(phi=tuple(phi), kappa=0.5 * top, r_p=r_p)


@dataclass(frozen=True)
class QuadformOracle:
    """Exact covariance of two centered quadratic forms and its decompositions."""

    lhs: float
    gaussian: float
    gamma_blk: float
    gamma_finite: float
    outcomes: int

    @property
    def rhs(self) -> float:
        return self.gaussian + self.gamma_blk

    @property
    def rhs_finite(self) -> float:
        return self.gaussian + self.gamma_finite


def quadform_cov_oracle(A, B, block_sizes, tau, delta, sigma_diag=None,
                        max_outcomes: int = 1 << 16) -> QuadformOracle:
    """Enumerate ``Cov(Q(A), Q(B))`` exactly for a tiny block model.

    Directions are Rademacher and each block's radial variable takes
    ``rho^2 = 1 +- sqrt(tau) p^(-delta/2)`` with equal probability, so the
    law of ``r`` has ``2^p * 2^B`` equally likely atoms.  The population
    covariance is ``diag(sigma_diag)`` (identity by default).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sizes = tuple(int(s) for s in block_sizes)
    p = sum(sizes)
    nb = len(sizes)
    if A.shape != (p, p) or B.shape != (p, p):
        raise ValueError("A and B must be p x p")
    count = 2 ** (p + nb)
    if count > max_outcomes:
        raise ValueError(f"{count} outcomes exceed the enumeration cap {max_outcomes}")
    params = GammaBlockParams(p=p, block_sizes=sizes, nu4=(-2.0,) * nb,
                              tau=tuple(tau), delta=tuple(delta))
    s = np.sqrt(params.radial_variances)
    g = np.ones(p) if sigma_diag is None else np.sqrt(np.asarray(sigma_diag, dtype=float))

    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=p)))
    radial = np.array(list(itertools.product((-1.0, 1.0), repeat=nb)))
    rho = np.sqrt(1.0 + radial * s)  # (2^B, B)
    coord_rho = np.repeat(rho, sizes, axis=1)  # (2^B, p)
    W = (coord_rho[:, None, :] * signs[None, :, :]).reshape(-1, p)
    Y = W * g

    Sigma = np.diag(g**2)
    qa = np.einsum("ki,ij,kj->k", Y, A, Y) - np.trace(A @ Sigma)
    qb = np.einsum("ki,ij,kj->k", Y, B, Y) - np.trace(B @ Sigma)
    lhs = float(np.mean(qa * qb))

    gaussian = float(np.trace(A @ Sigma @ B @ Sigma) + np.trace(A @ Sigma @ B.T @ Sigma))
    Aw = g[:, None] * A * g[None, :]
    Bw = g[:, None] * B * g[None, :]
    return QuadformOracle(
        lhs=lhs,
        gaussian=gaussian,
        gamma_blk=float(gamma_block(Aw, Bw, params)),
        gamma_finite=float(gamma_block_finite(Aw, Bw, params)),
        outcomes=count,
    )


def corr_boundary_gamma(n: int, beta4: float) -> float:
    """Correction kernel of self-normalized rows on a balanced +-1 diagonal direction.

    ``n^2 (n^2 beta4 - 1) / (n - 1) - 2 n`` where ``beta4 = E Y_1^4``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < beta4 < 1:
        raise ValueError("beta4 must lie in (0, 1)")
    return n**2 * (n**2 * beta4 - 1.0) / (n - 1.0) - 2.0 * n


def corr_boundary_monte_carlo(rows: np.ndarray) -> tuple:
    """Estimate the boundary kernel directly from sphere rows.

    Uses ``Q = n sum_i a_i Y_i^2`` with the balanced sign pattern
    ``a = (+1, -1, +1, ...)`` and returns ``(estimate, standard_error)`` of
    ``Var(Q) - 2n``.  ``n`` must be even.
    """
    count, n = rows.shape
    if n % 2:
        raise ValueError("the balanced sign pattern needs even n")
    a = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    q = n * (rows**2 @ a)
    q2 = q**2  # E Q = 0 exactly since tr(A Sigma) = 0
    estimate = float(q2.mean() - 2.0 * n)
    se = float(q2.std(ddof=1) / math.sqrt(count))
    return estimate, se
