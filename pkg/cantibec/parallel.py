"""Ordered process-pool map used by every grid scan."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)

THREADS_ENV = "CANTIBEC_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Workers to use: ``requested``, capped by CANTIBEC_THREADS and the CPU count."""
    available = os.cpu_count() or 1
    cap = os.getenv(THREADS_ENV)
    if cap:
        try:
            available = max(1, min(available, int(cap)))
        except ValueError:
            logger.warning(f"ignoring non-integer {THREADS_ENV}={cap!r}")
    if requested is None:
        return available
    return max(1, min(requested, available))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` keeping input order.

    Runs serially when ``workers <= 1``. ``fn`` must be picklable (a module
    level function or a ``functools.partial`` of one) for the process pool.
    Results never depend on the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(workers, len(items))
    logger.debug(f"mapping {len(items)} items over {workers} processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
