"""Thread-pool helper honoring the ROSSLER_KNOTS_THREADS cap.

Results are merged by index, so parallel evaluation is bit-identical to
serial evaluation regardless of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["thread_count", "map_indexed"]


def thread_count() -> int:
    """Worker cap from ROSSLER_KNOTS_THREADS (0 or unset = auto)."""
    raw = os.environ.get("ROSSLER_KNOTS_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def map_indexed(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply fn to every item, possibly in parallel; order preserved.

    Exceptions are not swallowed: callers that need per-item failure maps
    wrap fn themselves.
    """
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
