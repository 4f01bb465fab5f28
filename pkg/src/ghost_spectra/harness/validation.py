"""Oracle suites behind the ``validate`` subcommand.

Each check returns a :class:`CheckResult` with the measured quantities, so
the same code drives the CLI report and the acceptance tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..calibration import (BlockKernel, ContourSpec, SphericalKernel, cov_approximant,
                           mean_approximant, residue_m1_spherical)
from ..ghost import corr_boundary_gamma, corr_boundary_monte_carlo, quadform_cov_oracle
from ..models import preset, sample_sphere_rows, sample_spike_dataset
from ..mp import (DiscreteLaw, companion_closed_form_null, inverse_map, solve_companion,
                  solve_companion_array)
from ..rng import SeedSpec
from .config import DEFAULT_SEED
from .parallel import ordered_map


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{self.name}: {'pass' if self.passed else 'FAIL'} ({self.detail})"


def _rng(seed: int, tag: str) -> np.random.Generator:
    return SeedSpec(seed, f"validate/{tag}").generator()


def quadform_cases(seed: int = DEFAULT_SEED, pairs: int = 20):
    """Yield ``(label, oracle)`` for random dense and diagonal pairs at p=4 and p=6."""
    rng = _rng(seed, "quadform")
    layouts = {4: (2, 2), 6: (2, 4)}
    tau, delta = (0.8, 1.5), (1.0, 0.6)
    for p, sizes in layouts.items():
        for _ in range(pairs):
            A, B = rng.standard_normal((2, p, p))
            yield f"dense/p={p}", quadform_cov_oracle(A, B, sizes, tau, delta)
            a, b = rng.standard_normal((2, p))
            yield f"diagonal/p={p}", quadform_cov_oracle(np.diag(a), np.diag(b), sizes, tau, delta)


def check_quadform_enumeration(seed: int = DEFAULT_SEED, tol: float = 1e-12) -> CheckResult:
    """Exact enumeration against the finite-p kernel (all pairs) and the
    limiting block kernel (diagonal pairs, where the two coincide)."""
    err_finite = 0.0
    err_diag = 0.0
    err_dense_literal = 0.0
    for label, orc in quadform_cases(seed):
        err_finite = max(err_finite, abs(orc.lhs - orc.rhs_finite))
        if label.startswith("diagonal"):
            err_diag = max(err_diag, abs(orc.lhs - orc.rhs))
        else:
            err_dense_literal = max(err_dense_literal, abs(orc.lhs - orc.rhs))
    passed = err_finite <= tol and err_diag <= tol
    detail = (f"max abs err {err_finite:.1e} vs finite kernel, {err_diag:.1e} vs block kernel "
              f"on diagonal pairs; dense pairs differ from the block kernel by up to "
              f"{err_dense_literal:.3g}")
    return CheckResult("quadform_enumeration", passed, detail,
                       {"err_finite": err_finite, "err_diagonal": err_diag,
                        "err_dense_literal": err_dense_literal})


def contour_sample(c: float, H: DiscreteLaw, count: int = 100) -> np.ndarray:
    z, _ = ContourSpec.around(c, H).nodes()
    idx = np.linspace(0, z.size - 1, count).round().astype(int)
    return z[idx]


def check_mp_closed_form(c: float = 0.5, tol: float = 1e-10) -> CheckResult:
    H = DiscreteLaw.point()
    z = contour_sample(c, H)
    u, _ = solve_companion_array(z, c, H)
    err = float(np.max(np.abs(u - companion_closed_form_null(z, c))))
    return CheckResult("mp_closed_form", err < tol, f"sup node error {err:.1e} at 100 nodes",
                       {"sup_error": err})


def check_mp_round_trip(tol: float = 1e-9) -> CheckResult:
    worst = 0.0
    herglotz = True
    laws = [(0.5, DiscreteLaw.point()), (0.3, DiscreteLaw.mixture([(1.0, 0.5), (3.0, 0.5)])),
            (2.0, DiscreteLaw.mixture([(0.5, 0.2), (1.0, 0.3), (4.0, 0.5)]))]
    for c, H in laws:
        for z in contour_sample(c, H):
            sol = solve_companion(z, c, H)
            zz, _ = inverse_map(sol.u, c, H)
            worst = max(worst, abs(zz - z))
            herglotz &= sol.u.imag * z.imag > 0 and sol.m.imag * z.imag > 0
    passed = worst < tol and herglotz
    return CheckResult("mp_round_trip", passed,
                       f"max |z(u(z)) - z| {worst:.1e}, Herglotz sign {'ok' if herglotz else 'violated'}",
                       {"max_error": worst, "herglotz": herglotz})


def calibration_cases(p: int = 200, n: int = 400):
    m4 = BlockKernel(preset("M4", p, n).gamma_params())
    return [("rademacher", SphericalKernel(-2.0 * p)), ("gaussian", SphericalKernel(0.0)),
            ("M4", SphericalKernel(m4.gamma_used)), ("M4-block", m4)]


def check_calibration(p: int = 200, n: int = 400) -> CheckResult:
    """Approximants against exact finite-n moments under sphericity."""
    c = p / n
    H = DiscreteLaw.point()
    errs = {"M0(x)": 0.0, "M0(x2)": 0.0, "M(x2)": 0.0, "V(x,x)": 0.0, "M(x)": 0.0}
    for _, kernel in calibration_cases(p, n):
        g = kernel.gamma_used
        M0x, M1x = mean_approximant("x", c, H, kernel, n)
        M0, M1 = mean_approximant("x2", c, H, kernel, n)
        V0, V1 = cov_approximant("x", "x", c, H, kernel, n)
        errs["M0(x)"] = max(errs["M0(x)"], abs(M0x))
        errs["M(x)"] = max(errs["M(x)"], abs(M0x + M1x))
        errs["M0(x2)"] = max(errs["M0(x2)"], abs(M0 - c))
        errs["M(x2)"] = max(errs["M(x2)"], abs(M0 + M1 - (c + g / n)))
        errs["V(x,x)"] = max(errs["V(x,x)"], abs(V0 + V1 - (2 * c + g / n)))
    tols = {"M0(x)": 1e-8, "M(x)": 1e-8, "M0(x2)": 1e-6, "M(x2)": 1e-5, "V(x,x)": 1e-4}
    passed = all(errs[k] <= tols[k] for k in tols)
    detail = ", ".join(f"{k} err {v:.1e}" for k, v in errs.items())
    return CheckResult("calibration_moments", passed, detail, errs)


def check_residue(c: float = 0.5, tol: float = 1e-6) -> CheckResult:
    H = DiscreteLaw.point()
    n = 400
    kernel = SphericalKernel(float(n))  # gamma / n = 1, so M1 equals the multiplier
    worst = 0.0
    values = {}
    for f in ("x", "x2", "x3", "x4"):
        res = residue_m1_spherical(f, c)
        _, M1 = mean_approximant(f, c, H, kernel, n)
        values[f] = res
        worst = max(worst, abs(res - M1))
    exact_ok = abs(values["x"]) < 1e-14 and abs(values["x2"] - 1.0) < 1e-14
    passed = exact_ok and worst < tol
    return CheckResult("residue_agreement", passed,
                       f"residues x:{values['x']:.3g} x2:{values['x2']:.3g}, "
                       f"max |residue - quadrature| {worst:.1e}",
                       {"residues": values, "max_error": worst})


def poisson_counts(reps: int, seed: int = DEFAULT_SEED, p: int = 1000, n: int = 2000,
                   lam: float = 1.0, threads: Optional[int] = None) -> np.ndarray:
    """Replicates of ``round(L_n(x) + lam)`` under the sparse-spike law."""

    def one(r):
        X = sample_spike_dataset(p, n, lam, SeedSpec(seed, "validate/poisson", r)).data
        trace = float(np.einsum("ij,ij->", X, X)) / n
        return trace - p + lam

    return np.rint(np.array(ordered_map(one, range(reps), threads))).astype(int)


def check_poisson(reps: int = 5000, seed: int = DEFAULT_SEED, threads: Optional[int] = None,
                  pmf_tol: Optional[float] = None, mean_tol: Optional[float] = None) -> CheckResult:
    counts = poisson_counts(reps, seed, threads=threads)
    pmf_tol = 0.02 if pmf_tol is None else pmf_tol
    mean_tol = 0.05 if mean_tol is None else mean_tol
    errs = [abs(np.mean(counts == k) - math.exp(-1.0) / math.factorial(k)) for k in range(4)]
    mean = float(counts.mean())
    passed = max(errs) <= pmf_tol and abs(mean - 1.0) <= mean_tol
    return CheckResult("poisson_spike", passed,
                       f"max pmf err {max(errs):.4f} over k=0..3, mean {mean:.4f}, reps {reps}",
                       {"pmf_errors": errs, "mean": mean})


def check_corr_boundary(rows: int = 1_000_000, seed: int = DEFAULT_SEED) -> CheckResult:
    parts = []
    passed = True
    values = {}
    for n in (4, 8, 16):
        est, se = corr_boundary_monte_carlo(sample_sphere_rows(n, rows, SeedSpec(seed, f"validate/sphere/{n}")))
        target = -4.0 * n / (n + 2.0)
        exact = corr_boundary_gamma(n, 3.0 / (n * (n + 2.0)))
        ok = abs(est - target) <= 3.0 * se and abs(exact - target) < 1e-12
        passed &= ok
        values[n] = (est, se, target)
        parts.append(f"n={n}: {est:.4f}+-{se:.4f} vs {target:.4f}")
    return CheckResult("correlation_boundary", passed, "; ".join(parts), values)


def run_validate(seed: int = DEFAULT_SEED, quick: bool = False,
                 threads: Optional[int] = None) -> list:
    """Run every oracle suite; ``quick`` shrinks the two Monte Carlo checks."""
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_quadform_enumeration(seed),
        check_mp_closed_form,
        check_mp_round_trip,
        check_calibration,
        check_residue,
    ]
    if quick:
        reps = 400
        band = 3.5 * math.sqrt(0.25 / reps)
        checks.append(lambda: check_poisson(reps, seed, threads, pmf_tol=band,
                                            mean_tol=3.5 / math.sqrt(reps)))
        checks.append(lambda: check_corr_boundary(50_000, seed))
    else:
        checks.append(lambda: check_poisson(5000, seed, threads))
        checks.append(lambda: check_corr_boundary(1_000_000, seed))
    return [check() for check in checks]
