"""Deterministic block-parallel map and sum.

Work is split into blocks whose layout depends only on the problem size, never
on the worker count, and partial results are combined in block order by a
fixed pairwise tree. Results are therefore bit-identical for any number of
workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

#: Items per block for node reductions.
BLOCK = 2048

_jobs: int | None = None


def set_jobs(jobs: int | None) -> None:
    """Set the worker count used when callers do not pass one (None restores the default)."""
    global _jobs
    if jobs is not None and int(jobs) < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    _jobs = None if jobs is None else int(jobs)


def get_jobs() -> int:
    if _jobs is not None:
        return _jobs
    env = os.environ.get("VERIFY_JOBS")
    return max(1, int(env)) if env else 1


def parallel_map(fn: Callable, items: Sequence, jobs: int | None = None) -> list:
    """``[fn(item) for item in items]``, possibly evaluated on a thread pool."""
    jobs = get_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def pairwise_sum(parts: Sequence[np.ndarray]):
    """Sum in a fixed balanced tree over the given order."""
    parts = list(parts)
    if not parts:
        return 0.0
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def blocks(n: int, block: int = BLOCK) -> list[tuple[int, int]]:
    return [(s, min(s + block, n)) for s in range(0, n, block)]


def blocked_sum(term: Callable[[int, int], np.ndarray], n: int, block: int = BLOCK, jobs: int | None = None):
    """Sum of ``term(start, stop)`` over a fixed partition of ``range(n)``."""
    return pairwise_sum(parallel_map(lambda se: term(*se), blocks(n, block), jobs))
