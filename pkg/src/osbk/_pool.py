"""Deterministic task execution and seeding.

Parallelism must never change results: tasks get counter-split random
streams keyed by (master seed, task index), and outputs are merged in task
order. ``OSBK_THREADS`` caps the worker pool; any value of the cap yields
byte-identical artifacts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

_ENV_VAR = "OSBK_THREADS"


def task_rng(seed: int, task: int) -> np.random.Generator:
    """Random generator for task number ``task`` under master ``seed``.

    Philox is counter based: ``jumped`` advances by 2**128 steps per task,
    so streams never overlap and do not depend on how tasks are scheduled.
    """
    return np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 128) - 1)).jumped(int(task)))


def thread_count() -> int:
    """Pool size: cpu count capped by the OSBK_THREADS environment variable."""
    n = os.cpu_count() or 1
    cap = os.environ.get(_ENV_VAR)
    if cap is not None:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            n = 1
    return max(1, n)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map over a worker pool.

    Results come back indexed by input order, so the merge is independent
    of thread count and scheduling.
    """
    seq: Sequence[T] = list(items)
    workers = min(thread_count(), max(1, len(seq)))
    if workers <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
