"""Data-generating processes.

All generators return a ``p x n`` array whose columns are observations.
Randomness comes exclusively from the :class:`~ghost_spectra.rng.SeedSpec`
(or generator) passed in, so outputs are reproducible bit for bit.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .ghost import GammaBlockParams
from .rng import as_generator

DIRECTIONS = ("gaussian", "rademacher", "student_t")

_T_PATTERN = re.compile(r"^(?:t|student_t)\(?(\d+(?:\.\d+)?)\)?$")


@dataclass(frozen=True)
class BlockSpec:
    """One block of the blockwise mixed radial model.

    Parameters
    ----------
    ratio : float
        Share of the dimension ``p`` allocated to this block.
    direction : str
        ``"gaussian"``, ``"rademacher"`` or ``"student_t"``.  Shorthands such
        as ``"t8"`` or ``"student_t(8)"`` set ``df`` as well.
    tau, delta : float
        Radial variance ``Var(rho^2) = tau * p**(-delta)``.
    alpha : float
        Block growth exponent, only used for phase diagnostics.
    df : float, optional
        Degrees of freedom for Student-t directions (must exceed 4).
    """

    ratio: float
    direction: str = "gaussian"
    tau: float = 0.0
    delta: float = 1.0
    alpha: float = 1.0
    df: Optional[float] = None

    def __post_init__(self):
        direction = self.direction.strip().lower()
        match = _T_PATTERN.match(direction)
        if match:
            object.__setattr__(self, "df", float(match.group(1)))
            direction = "student_t"
        object.__setattr__(self, "direction", direction)
        if direction not in DIRECTIONS:
            raise ValueError(f"unknown direction law {self.direction!r}")
        if direction == "student_t" and (self.df is None or self.df <= 4):
            raise ValueError("student_t directions need df > 4")
        if not 0 < self.ratio <= 1:
            raise ValueError("block ratio must lie in (0, 1]")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def nu4(self) -> float:
        """Fourth cumulant of the standardized direction coordinates."""
        if self.direction == "gaussian":
            return 0.0
        if self.direction == "rademacher":
            return -2.0
        return 6.0 / (self.df - 4.0)

    def radial_scale(self, p: int) -> float:
        """Half-width of the uniform law of ``rho^2 - 1``."""
        return math.sqrt(3.0 * self.tau) * p ** (-self.delta / 2.0)

    def radial_variance(self, p: int) -> float:
        return self.tau * p ** (-self.delta)

    def draw_directions(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.direction == "gaussian":
            return rng.standard_normal(shape)
        if self.direction == "rademacher":
            bits = rng.integers(0, 2, size=shape, dtype=np.int8)
            return (2.0 * bits - 1.0).astype(np.float64)
        scale = math.sqrt((self.df - 2.0) / self.df)
        return rng.standard_t(self.df, size=shape) * scale

    def to_dict(self) -> dict:
        out = {"ratio": self.ratio, "direction": self.direction, "tau": self.tau,
               "delta": self.delta, "alpha": self.alpha}
        if self.df is not None:
            out["df"] = self.df
        return out


@dataclass(frozen=True)
class BlockModelConfig:
    """Blockwise mixed radial model at a fixed ``(p, n)``.

    The population covariance is ``sigma2 * diag(sigma_diag)``, with
    ``sigma_diag`` defaulting to all ones (the spherical null).
    """

    p: int
    n: int
    blocks: tuple = field(default_factory=lambda: (BlockSpec(1.0),))
    sigma2: float = 1.0
    sigma_diag: Optional[np.ndarray] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.p < 1 or self.n < 1:
            raise ValueError("p and n must be positive")
        if not self.blocks:
            raise ValueError("at least one block is required")
        total = sum(b.ratio for b in self.blocks)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"block ratios sum to {total!r}, expected 1")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.sigma_diag is not None:
            diag = np.asarray(self.sigma_diag, dtype=float)
            if diag.shape != (self.p,):
                raise ValueError("sigma_diag must have length p")
            if np.any(diag < 0) or not np.all(np.isfinite(diag)):
                raise ValueError("sigma_diag entries must be finite and nonnegative")
            object.__setattr__(self, "sigma_diag", diag)
        sizes = self.block_sizes
        if min(sizes) < 1:
            raise ValueError(f"block sizes {sizes} leave an empty block at p={self.p}")

    @property
    def block_sizes(self) -> tuple:
        sizes = [int(round(b.ratio * self.p)) for b in self.blocks[:-1]]
        sizes.append(self.p - sum(sizes))
        return tuple(sizes)

    @property
    def c_n(self) -> float:
        return self.p / self.n

    def covariance_diag(self) -> np.ndarray:
        diag = np.ones(self.p) if self.sigma_diag is None else self.sigma_diag
        return self.sigma2 * diag

    def with_size(self, p: int, n: int) -> "BlockModelConfig":
        return replace(self, p=p, n=n, sigma_diag=None)

    def with_sigma_diag(self, diag) -> "BlockModelConfig":
        return replace(self, sigma_diag=np.asarray(diag, dtype=float))

    def gamma_params(self) -> GammaBlockParams:
        """Correction-kernel parameters of the standardized (``Sigma = I``) model."""
        return GammaBlockParams(
            p=self.p,
            block_sizes=self.block_sizes,
            nu4=tuple(b.nu4 for b in self.blocks),
            tau=tuple(b.tau for b in self.blocks),
            delta=tuple(b.delta for b in self.blocks),
        )

    def check_radial(self) -> None:
        for j, block in enumerate(self.blocks):
            scale = block.radial_scale(self.p)
            if scale >= 1.0:
                raise ValueError(
                    f"block {j}: sqrt(3 tau) p^(-delta/2) = {scale:.4g} >= 1, "
                    f"radial positivity fails at p={self.p}"
                )

    def to_dict(self) -> dict:
        return {"name": self.name, "blocks": [b.to_dict() for b in self.blocks],
                "sigma2": self.sigma2}


PRESETS = {
    "M1": (BlockSpec(1.0, "gaussian"),),
    "M2": (BlockSpec(1.0, "rademacher"),),
    "M3": (BlockSpec(0.4, "gaussian", 0.8, 1.0), BlockSpec(0.6, "gaussian", 1.2, 0.8)),
    "M4": (BlockSpec(0.2, "gaussian", 1.0, 1.0), BlockSpec(0.8, "gaussian", 2.0, 0.6)),
    "M5": (BlockSpec(0.2, "t8", 1.0, 1.0), BlockSpec(0.8, "t8", 2.0, 0.6)),
    "M6": (
        BlockSpec(0.1, "rademacher", 0.8, 1.2),
        BlockSpec(0.2, "rademacher", 1.5, 0.9),
        BlockSpec(0.7, "rademacher", 2.2, 0.6),
    ),
}


def preset(name: str, p: int, n: Optional[int] = None) -> BlockModelConfig:
    """Representative models M1-M6; ``n`` defaults to ``2 p``."""
    key = name.upper()
    if key not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return BlockModelConfig(p=p, n=2 * p if n is None else n, blocks=PRESETS[key], name=key)


def sample_block_dataset(cfg: BlockModelConfig, seed) -> np.ndarray:
    """Draw ``n`` independent observations from the blockwise mixed radial model.

    Within block ``j`` the coordinates are iid standardized draws from the
    block's direction law, scaled per observation by ``rho_j`` where
    ``rho_j^2 = 1 + sqrt(3 tau_j) p^(-delta_j/2) U`` and ``U ~ Uniform[-1, 1]``.
    Rows are finally scaled by the square root of the covariance diagonal.
    """
    cfg.check_radial()
    rng = as_generator(seed)
    X = np.empty((cfg.p, cfg.n))
    start = 0
    for block, size in zip(cfg.blocks, cfg.block_sizes):
        rows = slice(start, start + size)
        X[rows] = block.draw_directions(rng, (size, cfg.n))
        scale = block.radial_scale(cfg.p)
        if scale > 0:
            rho2 = 1.0 + scale * rng.uniform(-1.0, 1.0, size=cfg.n)
            X[rows] *= np.sqrt(rho2)
        start += size
    if cfg.sigma_diag is not None:
        X *= np.sqrt(cfg.covariance_diag())[:, None]
    elif cfg.sigma2 != 1.0:
        X *= math.sqrt(cfg.sigma2)
    return X


@dataclass(frozen=True)
class SpikeSample:
    data: np.ndarray
    q: float
    b2: float
    lam: float


def spike_law(p: int, n: int, lam: float) -> tuple:
    """Return ``(q_n, b_n^2)`` of the sparse-spike four-point entry law."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    q = lam / (p * n)
    if q >= 1 or q * n >= 1:
        raise ValueError("q_n * n >= 1 makes b_n^2 nonpositive")
    return q, (1.0 - q * n) / (1.0 - q)


def sample_spike_dataset(p: int, n: int, lam: float, seed) -> SpikeSample:
    """iid entries with ``P(+-sqrt(n)) = q/2`` and ``P(+-b) = (1-q)/2``, ``q = lam/(pn)``.

    A single uniform per entry decides both the magnitude and the sign.
    """
    q, b2 = spike_law(p, n, lam)
    rng = as_generator(seed)
    u = rng.random((p, n))
    b = math.sqrt(b2)
    # u < q marks a spike; the sign is a fair coin read off the same uniform
    data = np.where(u < q + 0.5 * (1.0 - q), b, -b)
    spikes = np.flatnonzero(u < q)
    if spikes.size:
        data.flat[spikes] = np.where(u.flat[spikes] < 0.5 * q, math.sqrt(n), -math.sqrt(n))
    return SpikeSample(data=data, q=q, b2=b2, lam=lam)


def sample_sphere_rows(n: int, count: int, seed) -> np.ndarray:
    """``count`` rows drawn uniformly from the unit sphere in ``R^n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if count < 1:
        raise ValueError("count must be positive")
    rng = as_generator(seed)
    x = rng.standard_normal((count, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


def alternative_sigma_diag(p: int, fraction: float, a: float) -> np.ndarray:
    """``diag(a, ..., a, 1, ..., 1)`` with ``floor(fraction * p)`` leading entries equal to ``a``."""
    if p < 1:
        raise ValueError("p must be positive")
    diag = np.ones(p)
    diag[: int(math.floor(fraction * p))] = a
    return diag


def model_from_dict(spec, p: int, n: int) -> BlockModelConfig:
    """Build a model from a preset name or a ``{"name", "blocks", "sigma2"}`` mapping."""
    if isinstance(spec, str):
        return preset(spec, p, n)
    if "blocks" not in spec:
        return preset(spec["name"], p, n)
    blocks = [BlockSpec(**b) for b in spec["blocks"]]
    return BlockModelConfig(p=p, n=n, blocks=blocks, sigma2=spec.get("sigma2", 1.0),
                            name=spec.get("name", "custom"))


def model_names(specs: Sequence) -> list:
    return [s if isinstance(s, str) else s.get("name", "custom") for s in specs]
