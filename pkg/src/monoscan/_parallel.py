"""Deterministic fan-out of independent replications.

Replication k consumes only its own derived random stream, so results are a
pure function of the index and the evaluation order never matters.  The
worker count (``MONOSCAN_THREADS`` or the CPU count) therefore affects wall
time only, never values.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from .errors import ConfigError

THREADS_ENV = "MONOSCAN_THREADS"


def worker_count() -> int:
    """Worker processes to use: MONOSCAN_THREADS if set, else the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if workers < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {workers}")
    return workers


def map_indexed(fn: Callable[[int], object], count: int) -> list:
    """Evaluate ``fn(k)`` for k = 0..count-1, results in index order.

    ``fn`` must be picklable (a module-level function or a partial of one)
    when more than one worker is used.
    """
    if count < 0:
        raise ConfigError("replication count must be >= 0")
    workers = min(worker_count(), max(count, 1))
    if workers <= 1:
        return [fn(k) for k in range(count)]
    chunksize = max(1, count // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count), chunksize=chunksize))
