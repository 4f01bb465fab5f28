"""Mean and covariance approximants of linear spectral statistics.

The approximants are contour integrals around the support of ``F^{c,H}``
of expressions in the companion transform ``u = underline m(z)``.  They are
evaluated with Gauss-Legendre quadrature on each side of a rectangle, which
converges geometrically for the analytic integrands involved.

Orientation convention
----------------------
The rectangle is traversed counterclockwise in the ``z``-plane.  Under the
spherical null this gives ``M1(x^2) = +gamma/n``, which is what the exact
finite-``n`` identity ``E tr S^2 = p(1 + c) + c + gamma/n`` requires.
Passing ``reverse_orientation=True`` flips the model-dependent mean term to the
opposite sign, ``M1(x^2) = -gamma/n``, for literal comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from .ghost import GammaBlockParams, gamma_scalar_closed_form
from .mp import DiscreteLaw, solve_companion_array, support_interval

MAX_DEGREE = 4
RESIDUE_MAX_DEGREE = 8
IMAG_TOL = 1e-6


class CalibrationError(RuntimeError):
    pass


_NAMED = {"1": [1.0], "x": [0.0, 1.0], "x1": [0.0, 1.0], "f1": [0.0, 1.0],
          "x2": [0.0, 0.0, 1.0], "x^2": [0.0, 0.0, 1.0], "f2": [0.0, 0.0, 1.0],
          "x3": [0.0, 0.0, 0.0, 1.0], "x4": [0.0, 0.0, 0.0, 0.0, 1.0]}


def as_polynomial(f, max_degree: int = MAX_DEGREE) -> Polynomial:
    """Coerce a test function to a :class:`numpy.polynomial.Polynomial`.

    Accepts a Polynomial, a sequence of coefficients (constant term first)
    or one of the names ``"1"``, ``"x"``, ``"x2"``, ``"x3"``, ``"x4"``.
    """
    if isinstance(f, Polynomial):
        poly = f
    elif isinstance(f, str):
        key = f.strip().lower().replace(" ", "")
        if key not in _NAMED:
            raise ValueError(f"unknown test function {f!r}")
        poly = Polynomial(_NAMED[key])
    else:
        poly = Polynomial(np.asarray(f, dtype=float))
    poly = poly.trim()
    if poly.degree() > max_degree:
        raise ValueError(f"test functions are limited to degree {max_degree}")
    return poly


@dataclass(frozen=True)
class ContourSpec:
    """Axis-aligned rectangle ``[x_l, x_r] x [-v0, v0]`` in the ``z``-plane."""

    x_l: float
    x_r: float
    v0: float = 0.75
    nodes_per_side: int = 512
    margin: float = 0.5

    def __post_init__(self):
        if not self.x_l < self.x_r:
            raise ValueError("x_l must be left of x_r")
        if self.v0 <= 0:
            raise ValueError("v0 must be positive")
        if self.nodes_per_side < 32:
            raise ValueError("nodes_per_side must be at least 32")

    @classmethod
    def around(cls, c: float, H: DiscreteLaw, margin: float = 0.5, v0: float = 0.75,
               nodes_per_side: int = 512) -> "ContourSpec":
        lo, hi = support_interval(c, H)
        return cls(lo - margin, hi + margin, v0, nodes_per_side, margin)

    def check_encloses(self, c: float, H: DiscreteLaw) -> None:
        lo, hi = support_interval(c, H)
        if not (self.x_l <= lo - self.margin and hi + self.margin <= self.x_r):
            raise ValueError(
                f"contour [{self.x_l}, {self.x_r}] does not clear the support "
                f"[{lo:.4g}, {hi:.4g}] by the margin {self.margin}"
            )

    def expanded(self, gap: float) -> "ContourSpec":
        return replace(self, x_l=self.x_l - gap, x_r=self.x_r + gap, v0=self.v0 + gap,
                       margin=self.margin + gap)

    def nodes(self):
        """Nodes ``z`` and complex weights ``w`` with ``sum(w g(z)) ~ oint g dz``.

        Vertical sides are split at the real axis so no node sits on it.
        """
        x, wx = np.polynomial.legendre.leggauss(self.nodes_per_side)
        xh, wh = np.polynomial.legendre.leggauss(max(16, (self.nodes_per_side + 1) // 2))
        lo, hi, v = self.x_l, self.x_r, self.v0
        segments = [
            (complex(lo, -v), complex(hi, -v), x, wx),
            (complex(hi, -v), complex(hi, 0.0), xh, wh),
            (complex(hi, 0.0), complex(hi, v), xh, wh),
            (complex(hi, v), complex(lo, v), x, wx),
            (complex(lo, v), complex(lo, 0.0), xh, wh),
            (complex(lo, 0.0), complex(lo, -v), xh, wh),
        ]
        zs, ws = [], []
        for a, b, nodes, weights in segments:
            half = 0.5 * (b - a)
            zs.append(0.5 * (a + b) + half * nodes)
            ws.append(half * weights)
        return np.concatenate(zs), np.concatenate(ws)


class SphericalKernel:
    """Correction kernel under ``Sigma = sigma2 I``: everything reduces to ``gamma``.

    ``Gamma(H^-1(z1), H^-1(z2)) = a(z1) a(z2) gamma`` and
    ``Gamma(H^-1(z), H^-2(z)) = a(z)^3 gamma`` with ``a = 1/(1 + sigma2 u)``.
    """

    def __init__(self, gamma: float, sigma2: float = 1.0):
        self.gamma = float(gamma)
        self.sigma2 = float(sigma2)

    @property
    def gamma_used(self) -> float:
        return self.gamma

    def law(self) -> DiscreteLaw:
        return DiscreteLaw.point(self.sigma2)

    def mean_term(self, u):
        a = 1.0 / (1.0 + self.sigma2 * u)
        return self.gamma * a**3

    def factors(self, u):
        a = 1.0 / (1.0 + self.sigma2 * u)
        return np.array([self.gamma]), a[None, :]


class BlockKernel:
    """Blockwise kernel evaluated on diagonal resolvents.

    With ``Sigma = G G^T`` diagonal, the kernel arguments are
    ``G H^-1 G = diag(s_i / (1 + u s_i))`` and ``G H^-2 G = diag(s_i / (1 + u s_i)^2)``.
    Coordinates sharing a block and a variance ``s_i`` are pooled into cells,
    so the cost does not grow with ``p``.
    """

    def __init__(self, params: GammaBlockParams, sigma_diag=None):
        self.params = params
        diag = np.ones(params.p) if sigma_diag is None else np.asarray(sigma_diag, dtype=float)
        if diag.shape != (params.p,):
            raise ValueError("sigma_diag must have length p")
        self.sigma_diag = diag
        cells = []
        for j, sl in enumerate(params.slices()):
            values, counts = np.unique(diag[sl], return_counts=True)
            cells.extend((j, s, k) for s, k in zip(values, counts))
        self._block = np.array([c[0] for c in cells])
        self._s = np.array([c[1] for c in cells], dtype=float)
        self._count = np.array([c[2] for c in cells], dtype=float)

    @property
    def gamma_used(self) -> float:
        return gamma_scalar_closed_form(self.params)

    def law(self) -> DiscreteLaw:
        return DiscreteLaw.from_values(self.sigma_diag)

    def _resolvents(self, u):
        d = 1.0 + np.asarray(u)[:, None] * self._s
        return self._s / d, self._s / d**2

    def _block_sums(self, values):
        nb = len(self.params.block_sizes)
        out = np.zeros((values.shape[0], nb), dtype=values.dtype)
        for j in range(nb):
            out[:, j] = values[:, self._block == j] @ self._count[self._block == j]
        return out

    def mean_term(self, u):
        g1, g2 = self._resolvents(u)
        nu4 = np.asarray(self.params.nu4)[self._block]
        hadamard = (g1 * g2) @ (nu4 * self._count)
        trace = (self._block_sums(g1) * self._block_sums(g2)) @ self.params.radial_variances
        return hadamard + trace

    def factors(self, u):
        g1, _ = self._resolvents(u)
        nu4 = np.asarray(self.params.nu4)[self._block]
        weights = np.concatenate([nu4 * self._count, self.params.radial_variances])
        feats = np.concatenate([g1.T, self._block_sums(g1).T], axis=0)
        return weights, feats


@dataclass(frozen=True)
class LssCalibration:
    M0: float
    M1: float
    V0: float
    V1: float
    gamma_used: float
    c_n: float

    @property
    def mean(self) -> float:
        return self.M0 + self.M1

    @property
    def variance(self) -> float:
        return self.V0 + self.V1


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise CalibrationError(f"{what} has imaginary residue {value.imag:.3e}")
    return float(value.real)


def _resolvent_integrals(u, c, H):
    ut = u[:, None] * H.t
    d = 1.0 + ut
    s2 = c * np.sum(H.w * ut**2 / d**2, axis=1)
    s3 = np.sum(H.w * H.t**2 / d**3, axis=1)
    return 1.0 - s2, s3


def mean_approximant(f, c_n: float, H: DiscreteLaw, kernel=None, n: Optional[int] = None,
                     contour: Optional[ContourSpec] = None, reverse_orientation: bool = False) -> tuple:
    """Mean approximants ``(M0, M1)`` of ``L_n(f)``.

    Parameters
    ----------
    f : polynomial-like
        Test function, see :func:`as_polynomial`.
    c_n : float
        Aspect ratio ``p / n``.
    H : DiscreteLaw
        Population spectral law.
    kernel : SphericalKernel or BlockKernel, optional
        Correction kernel; ``M1`` is zero without one.
    n : int, optional
        Sample size, required with a kernel.
    contour : ContourSpec, optional
        Integration contour; defaults to :meth:`ContourSpec.around`.
    reverse_orientation : bool
        Flip the sign of ``M1`` (see module docstring).
    """
    poly = as_polynomial(f)
    contour = contour or ContourSpec.around(c_n, H)
    contour.check_encloses(c_n, H)
    z, w = contour.nodes()
    u, _ = solve_companion_array(z, c_n, H)
    denom, s3 = _resolvent_integrals(u, c_n, H)
    fz = poly(z)
    scale = -1.0 / (2j * math.pi)

    m0 = scale * np.sum(w * fz * c_n * u**3 * s3 / denom**2)
    M0 = _real(m0, "M0")
    M1 = 0.0
    if kernel is not None:
        if n is None:
            raise ValueError("n is required to evaluate the correction term")
        m1 = scale * np.sum(w * fz * u**3 / denom * kernel.mean_term(u)) / n
        M1 = _real(m1, "M1")
        if reverse_orientation:
            M1 = -M1
    return M0, M1


def _default_pair(c_n, H, contours):
    if contours is None:
        inner = ContourSpec.around(c_n, H)
        return inner, inner.expanded(0.25)
    inner, outer = contours
    if outer.v0 < inner.v0:
        inner, outer = outer, inner
    gap = min(inner.x_l - outer.x_l, outer.x_r - inner.x_r, outer.v0 - inner.v0)
    if gap < 0.05:
        raise ValueError("covariance contours must be nested with a gap of at least 0.05")
    return inner, outer


def cov_approximant(f, g, c_n: float, H: DiscreteLaw, kernel=None, n: Optional[int] = None,
                    contours=None, chunk: int = 256) -> tuple:
    """Covariance approximants ``(V0, V1)`` of ``(L_n(f), L_n(g))``.

    The double integral runs over two nested rectangles so that ``z1 != z2``
    everywhere.  The kernel part factorizes into single integrals.
    """
    pf = as_polynomial(f)
    pg = as_polynomial(g)
    inner, outer = _default_pair(c_n, H, contours)
    inner.check_encloses(c_n, H)
    z1, w1 = inner.nodes()
    z2, w2 = outer.nodes()
    u1, du1 = solve_companion_array(z1, c_n, H)
    u2, du2 = solve_companion_array(z2, c_n, H)
    a1 = w1 * pf(z1)
    a2 = w2 * pg(z2)
    scale = -1.0 / (4.0 * math.pi**2)

    total = 0j
    for start in range(0, z1.size, chunk):
        sl = slice(start, start + chunk)
        kern = (du1[sl, None] * du2[None, :] / (u1[sl, None] - u2[None, :]) ** 2
                - 1.0 / (z1[sl, None] - z2[None, :]) ** 2)
        total += np.sum(a1[sl, None] * a2[None, :] * kern)
    V0 = _real(scale * 2.0 * total, "V0")

    V1 = 0.0
    if kernel is not None:
        if n is None:
            raise ValueError("n is required to evaluate the correction term")
        wk, phi1 = kernel.factors(u1)
        _, phi2 = kernel.factors(u2)
        left = phi1 @ (a1 * du1)
        right = phi2 @ (a2 * du2)
        V1 = _real(scale * np.sum(wk * left * right) / n, "V1")
    return V0, V1


def calibrate(f, g=None, c_n: float = 0.5, H: Optional[DiscreteLaw] = None, kernel=None,
              n: Optional[int] = None, reverse_orientation: bool = False, **contour_kw) -> LssCalibration:
    """Bundle ``M0, M1`` for ``f`` and ``V0, V1`` for ``(f, g)``; ``g`` defaults to ``f``."""
    if H is None:
        H = kernel.law() if kernel is not None else DiscreteLaw.point()
    contour = ContourSpec.around(c_n, H, **contour_kw)
    M0, M1 = mean_approximant(f, c_n, H, kernel, n, contour, reverse_orientation)
    V0, V1 = cov_approximant(f, f if g is None else g, c_n, H, kernel, n,
                             (contour, contour.expanded(0.25)))
    gamma = kernel.gamma_used if kernel is not None else 0.0
    return LssCalibration(M0=M0, M1=M1, V0=V0, V1=V1, gamma_used=gamma, c_n=c_n)


def _series_mul(a, b, order):
    return np.convolve(a, b)[: order + 1]


def residue_m1_spherical(f, c_n: float, reverse_orientation: bool = False) -> float:
    """Coefficient ``k`` with ``M1(f) = k * gamma / n`` under the spherical null.

    In the ``u``-plane the correction is the residue at ``u = 0`` of
    ``f(z(u)) u / (1 + u)^3`` with ``z(u) = -1/u + c/(1+u)``.  The image of
    the counterclockwise ``z``-contour winds clockwise around ``u = 0``, so
    the shipped multiplier equals the residue itself; ``reverse_orientation`` negates it.
    """
    poly = as_polynomial(f, RESIDUE_MAX_DEGREE)
    coef = poly.coef
    top = len(coef) - 1
    order = max(top - 2, 0)
    k = np.arange(order + 1)
    # (1 + u)^-3 and c u / (1 + u) as truncated power series
    inv_cube = (-1.0) ** k * (k + 1) * (k + 2) / 2.0
    shifted = np.where(k >= 1, c_n * (-1.0) ** (k - 1), 0.0)
    base = shifted.copy()
    base[0] -= 1.0  # -1 + c u / (1 + u)

    # f(z(u)) u / (1+u)^3 = sum_d a_d u^(1-d) base^d (1+u)^-3
    residue = 0.0
    power = np.zeros(order + 1)
    power[0] = 1.0
    for d, a_d in enumerate(coef):
        if d >= 2 and a_d != 0:
            series = _series_mul(power, inv_cube, order)
            residue += a_d * series[d - 2]
        power = _series_mul(power, base, order)
    return float(-residue if reverse_orientation else residue)


def john_asymptotics(p: int, n: int, gamma: float) -> tuple:
    """``(E nU, Var nU, E Q, Var Q)`` of John's statistic to first order."""
    if p < 1 or n < 1:
        raise ValueError("p and n must be positive")
    return (p + 1.0 + gamma / p, 4.0, 0.5 * (p * p + p + gamma), float(p * p))
