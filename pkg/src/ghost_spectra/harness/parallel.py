"""Deterministic parallel map over replicate indices."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

ENV_THREADS = "GHOST_SPECTRA_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, then ``$GHOST_SPECTRA_THREADS``, then the CPU count."""
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be positive")
        return int(threads)
    env = os.environ.get(ENV_THREADS, "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{ENV_THREADS}={env!r} is not an integer") from None
        if value < 1:
            raise ValueError(f"{ENV_THREADS} must be positive")
        return value
    return os.cpu_count() or 1


def ordered_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    """``[fn(x) for x in items]`` computed on a thread pool.

    Results come back in input order, and every item carries its own seed,
    so the output does not depend on the number of workers.  NumPy releases
    the GIL inside the linear algebra that dominates each replicate.
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
