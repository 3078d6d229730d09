"""Process pool helpers shared by the census engine and the ensemble runner.

Work is split into contiguous index ranges; results come back in submission
order, so any reduction over them is deterministic whatever the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

from src.config import WORKERS_ENV
from src.errors import ConfigError
from src.logger import get_logger
from src.types import IndexRange

logger = get_logger(__name__)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit value, else ``FFBIAS_WORKERS``, else 1."""
    if workers is None:
        raw = os.getenv(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if workers < 1:
        raise ConfigError(f"worker count must be positive, got {workers}")
    return workers


def partition(start: int, stop: int, parts: int, align: int = 1) -> List[IndexRange]:
    """Split [start, stop) into at most ``parts`` contiguous ranges.

    Interior boundaries are multiples of ``align`` (chunk size), so the blocks
    each worker evaluates are the same blocks a serial run evaluates.
    """
    total = stop - start
    if total <= 0:
        return []
    blocks = -(-total // align)
    parts = max(1, min(parts, blocks))
    ranges: List[IndexRange] = []
    for k in range(parts):
        lo = start + (blocks * k // parts) * align
        hi = min(stop, start + (blocks * (k + 1) // parts) * align)
        if lo < hi:
            ranges.append((lo, hi))
    return ranges


def ordered_map(
    fn: Callable[..., Any], jobs: Sequence[Sequence[Any]], workers: int = 1
) -> List[Any]:
    """``[fn(*job) for job in jobs]``, optionally across processes."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    logger.debug("dispatching %d jobs to %d workers", len(jobs), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]
