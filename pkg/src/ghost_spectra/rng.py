"""Deterministic seed substreams.

Every Monte Carlo replicate owns a :class:`SeedSpec`, whose fields are hashed
into a 64-bit seed for a PCG64 bit generator, so a replicate's draws depend
only on ``(master_seed, experiment_id, replicate)`` and never on scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 output function."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    experiment_id: str
    replicate: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.replicate < 0:
            raise ValueError("replicate must be nonnegative")

    @property
    def stream_seed(self) -> int:
        mixed = (
            self.master_seed
            ^ (((self.replicate + 1) * GOLDEN_GAMMA) & MASK64)
            ^ fnv1a64(self.experiment_id)
        )
        return splitmix64(mixed)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.stream_seed))

    def child(self, tag: str) -> "SeedSpec":
        """Same replicate, independent stream keyed by ``experiment_id:tag``."""
        return SeedSpec(self.master_seed, f"{self.experiment_id}:{tag}", self.replicate)


def as_generator(seed) -> np.random.Generator:
    """Accept a SeedSpec, an existing Generator, or a plain integer seed."""
    if isinstance(seed, SeedSpec):
        return seed.generator()
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
