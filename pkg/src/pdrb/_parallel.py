import os
import threading
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

ENV_THREADS = "PDRB_THREADS"


def n_threads():
    """Thread cap from ``PDRB_THREADS``; 0 or unset means ``os.cpu_count()``."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_THREADS} must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items):
    """``list(map(fn, items))`` spread over threads; output order is input order."""
    items = list(items)
    workers = min(n_threads(), len(items))
    # Nested calls from a worker run inline so the shared pool cannot deadlock.
    if workers <= 1 or threading.current_thread().name.startswith("pdrb"):
        return [fn(x) for x in items]
    return list(_pool(workers).map(fn, items))


@lru_cache(maxsize=None)
def _pool(workers):
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="pdrb")
