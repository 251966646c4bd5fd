"""Ordered parallel map capped by the ``BO_THREADS`` environment variable."""
import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    env = os.environ.get("BO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_ordered(fn, items):
    """``[fn(x) for x in items]``, evaluated on a thread pool.

    numpy's LAPACK calls release the GIL, so threads pay off for the
    eigen-decompositions that dominate finite-difference sweeps. Output
    order always matches input order.
    """
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
