"""Marchenko-Pastur limit for a discrete population spectral law.

The companion Stieltjes transform ``u(z)`` of ``F^{c,H}`` is the inverse
of ``z(u) = -1/u + c * int t / (1 + t u) dH(t)``.  Everything here works on
complex numpy arrays so contour nodes can be solved in one pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteLaw:
    """Finite mixture of point masses ``sum_j w_j delta_{t_j}`` on ``[0, inf)``."""

    t: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if t.shape != w.shape or t.ndim != 1 or t.size == 0:
            raise ValueError("atoms and weights must be matching nonempty vectors")
        if not (np.all(np.isfinite(t)) and np.all(t >= 0)):
            raise ValueError("atoms must be finite and nonnegative")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "w", w)

    @classmethod
    def point(cls, t: float = 1.0) -> "DiscreteLaw":
        return cls(np.array([t]), np.array([1.0]))

    @classmethod
    def mixture(cls, pairs) -> "DiscreteLaw":
        t, w = zip(*pairs)
        return cls(np.array(t), np.array(w))

    @classmethod
    def from_values(cls, values) -> "DiscreteLaw":
        """Empirical law of a vector, e.g. the diagonal of ``Sigma``."""
        atoms, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
        return cls(atoms, counts / counts.sum())

    def moment(self, k: int) -> float:
        return float(np.sum(self.w * self.t**k))

    @property
    def min_atom(self) -> float:
        return float(self.t.min())

    @property
    def max_atom(self) -> float:
        return float(self.t.max())

    def integrate(self, fn):
        """``int fn(t) dH(t)`` for ``fn`` broadcasting over a trailing atom axis."""
        return np.sum(self.w * fn(self.t), axis=-1)


@dataclass(frozen=True)
class StieltjesValue:
    z: complex
    u: complex
    m: complex
    du_dz: complex


def _atoms(u, H: DiscreteLaw):
    return np.asarray(u)[..., None] * H.t


def inverse_map(u, c: float, H: DiscreteLaw):
    """Return ``(z(u), dz/du)`` for the companion equation.

    ``z = -1/u + c int t/(1+tu) dH`` and ``dz/du = 1/u^2 - c int t^2/(1+tu)^2 dH``.
    """
    u = np.asarray(u, dtype=complex)
    if np.any(u == 0):
        raise ValueError("u = 0 is a pole of the inverse map")
    denom = 1.0 + _atoms(u, H)
    if np.any(denom == 0):
        raise ValueError("1 + t u vanishes for some atom")
    z = -1.0 / u + c * np.sum(H.w * H.t / denom, axis=-1)
    dz = 1.0 / u**2 - c * np.sum(H.w * H.t**2 / denom**2, axis=-1)
    if z.ndim == 0:
        return complex(z), complex(dz)
    return z, dz


def _solve(z, c, H, tol, max_iter=500, damping=0.7, newton_switch=1e-3):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise ValueError("z must be off the real axis")
    flip = z.imag < 0
    zu = np.where(flip, np.conj(z), z)
    u = -1.0 / zu
    target = tol * (1.0 + np.abs(zu))
    done = np.zeros(zu.shape, dtype=bool)
    for _ in range(max_iter):
        zz, dz = inverse_map(u, c, H)
        resid = np.abs(zz - zu)
        done = resid <= target
        if done.all():
            break
        # damped fixed point far from the solution, Newton once close
        fp = -1.0 / (zu - c * np.sum(H.w * H.t / (1.0 + _atoms(u, H)), axis=-1))
        u_fp = (1.0 - damping) * u + damping * fp
        step = (zz - zu) / dz
        u_nt = u - step
        for _ in range(30):
            bad = u_nt.imag <= 0
            if not bad.any():
                break
            step = np.where(bad, 0.5 * step, step)
            u_nt = u - step
        use_newton = resid < newton_switch
        u = np.where(done, u, np.where(use_newton, u_nt, u_fp))
    else:
        zz, dz = inverse_map(u, c, H)
        done = np.abs(zz - zu) <= target
    if not done.all():
        worst = np.asarray(zu)[~done].ravel()[0]
        raise ConvergenceError(
            f"companion solver did not converge at z={complex(worst):.6g}; "
            "the contour is probably too close to the spectral support"
        )
    # one Newton polish step takes the residual from tol to rounding level
    zz, dz = inverse_map(u, c, H)
    polished = u - (zz - zu) / dz
    u = np.where(polished.imag > 0, polished, u)
    _, dz = inverse_map(u, c, H)
    u = np.where(flip, np.conj(u), u)
    dz = np.where(flip, np.conj(dz), dz)
    return u, 1.0 / dz


def solve_companion_array(z, c: float, H: DiscreteLaw, tol: float = 1e-12):
    """Vectorized solve: returns arrays ``(u, du/dz)`` matching ``z``."""
    return _solve(z, c, H, tol)


def solve_companion(z, c: float, H: DiscreteLaw, tol: float = 1e-12) -> StieltjesValue:
    """Solve the companion equation at one point off the real axis.

    Raises
    ------
    ConvergenceError
        When the iteration cap is reached, typically for ``z`` hugging the
        spectral support.
    """
    if not 1e-14 < tol < 1e-6:
        raise ValueError("tol must lie in (1e-14, 1e-6)")
    z = complex(z)
    u, du = _solve(np.array([z]), c, H, tol)
    u, du = complex(u[0]), complex(du[0])
    m = (u + (1.0 - c) / z) / c if c > 0 else complex(H.integrate(lambda t: 1.0 / (t - z)))
    return StieltjesValue(z=z, u=u, m=m, du_dz=du)


def companion_closed_form_null(z, c: float):
    """Root of ``z u^2 + (z + 1 - c) u + 1 = 0`` in the same half-plane as ``z``."""
    z = np.asarray(z, dtype=complex)
    b = z + 1.0 - c
    disc = np.sqrt(b * b - 4.0 * z)
    r1 = (-b + disc) / (2.0 * z)
    r2 = (-b - disc) / (2.0 * z)
    u = np.where(r1.imag * z.imag > 0, r1, r2)
    return complex(u) if u.ndim == 0 else u


def support_interval(c: float, H: DiscreteLaw) -> tuple:
    """Interval ``[min t 1{c<1} (1-sqrt c)^2, max t (1+sqrt c)^2]`` holding the support."""
    if c <= 0:
        raise ValueError("c must be positive")
    lo = H.min_atom * (1.0 - np.sqrt(c)) ** 2 if c < 1 else 0.0
    hi = H.max_atom * (1.0 + np.sqrt(c)) ** 2
    return float(lo), float(hi)
