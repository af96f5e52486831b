"""Order-preserving parallel map over (possibly unbounded) iterables."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")

BATCH_PER_WORKER = 32


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> Iterator[R]:
    """Yield fn(x) for x in items, in input order; jobs > 1 evaluates batches in worker processes.

    fn must be picklable (a module-level function or functools.partial of one).
    """
    if jobs <= 1:
        for x in items:
            yield fn(x)
        return
    it = iter(items)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = list(itertools.islice(it, jobs * BATCH_PER_WORKER))
            if not batch:
                return
            yield from pool.map(fn, batch, chunksize=max(1, len(batch) // (4 * jobs)))
