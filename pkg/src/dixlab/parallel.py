"""Order-preserving worker pool sized by ``DIXLAB_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def threads():
    try:
        return max(1, int(os.environ.get("DIXLAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """``list(map(fn, items))``, spread over threads; results keep input order."""
    items = list(items)
    n = threads()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
