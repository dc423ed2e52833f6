"""Thread-count resolution and a deterministic row-block map."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

from .errors import InvalidArgument

THREADS_ENV = "BIPHOTON_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise InvalidArgument(f"thread count must be >= 1, got {threads}")
    return int(threads)


def map_blocks(func: Callable[[int, int], None], n: int, threads: Optional[int] = None, block: int = 32) -> None:
    """Call func(start, stop) over [0, n) in fixed blocks. Each block writes a
    disjoint slice, so results do not depend on the thread count."""
    bounds = [(s, min(s + block, n)) for s in range(0, n, block)]
    nt = resolve_threads(threads)
    if nt == 1 or len(bounds) == 1:
        for a, b in bounds:
            func(a, b)
        return
    with ThreadPoolExecutor(max_workers=nt) as ex:
        for fut in [ex.submit(func, a, b) for a, b in bounds]:
            fut.result()
