"""Deterministic data-parallel helpers.

Work is split into contiguous chunks of row indices. Each chunk is computed
independently and the results are stitched back in index order, so the
output does not depend on the worker count. numpy releases the GIL inside
its kernels, which is why a thread pool is enough.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

_default_workers: int | None = None


def set_workers(n: int | None) -> None:
    """Fix the worker count used when a call does not pass one (None resets)."""
    global _default_workers
    if n is not None and n < 1:
        raise ValueError("worker count must be positive")
    _default_workers = n


def worker_count(requested: int | None = None) -> int:
    """Resolve the worker count: explicit argument, then AFFQHA_WORKERS, then 1."""
    if requested is not None:
        return max(1, int(requested))
    if _default_workers is not None:
        return _default_workers
    env = os.environ.get("AFFQHA_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"AFFQHA_WORKERS must be an integer, got {env!r}") from None
    return 1


def chunk_map(fn: Callable[[np.ndarray], T], n: int, workers: int | None = None, chunk: int = 16) -> list[T]:
    """Apply ``fn`` to consecutive index blocks of ``range(n)``; results in block order."""
    blocks = [np.arange(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    w = worker_count(workers)
    if w == 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, blocks))


def ordered_sum(parts: list[np.ndarray]) -> np.ndarray:
    """Pairwise sum in a fixed tree order, independent of how parts were produced."""
    if not parts:
        raise ValueError("nothing to sum")
    parts = list(parts)
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]
