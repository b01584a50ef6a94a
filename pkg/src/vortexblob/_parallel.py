"""Deterministic chunked dispatch of nogil kernels across threads.

Targets are split into contiguous index ranges; each range is processed by
one thread calling a jitted kernel that releases the GIL.  Per-target
results do not depend on the chunking, so any worker count produces
bit-identical output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

_executors: dict[int, ThreadPoolExecutor] = {}


def default_workers() -> int:
    return min(os.cpu_count() or 1, 8)


def resolve_workers(workers) -> int:
    if workers is None:
        return default_workers()
    w = int(workers)
    if w < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return w


def _executor(workers: int) -> ThreadPoolExecutor:
    ex = _executors.get(workers)
    if ex is None:
        ex = ThreadPoolExecutor(max_workers=workers)
        _executors[workers] = ex
    return ex


def run_chunked(body: Callable[[int, int], None], n: int, workers) -> None:
    """Run body(t0, t1) over a partition of range(n), possibly in parallel."""
    w = resolve_workers(workers)
    if w == 1 or n < 4 * w:
        body(0, n)
        return
    bounds = [n * k // w for k in range(w + 1)]
    ex = _executor(w)
    futures = [
        ex.submit(body, bounds[k], bounds[k + 1])
        for k in range(w)
        if bounds[k] < bounds[k + 1]
    ]
    for fut in futures:
        fut.result()
