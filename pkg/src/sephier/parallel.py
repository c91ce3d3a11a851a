"""Order-preserving map over independent samples, capped by ``SEPHIER_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SEPHIER_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items) -> list:
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
