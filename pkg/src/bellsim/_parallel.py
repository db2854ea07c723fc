"""Worker-count plumbing.

Trials are index-addressed (each derives its own random stream), so chunking
is free to vary: results are concatenated in index order and cannot depend on
how many workers ran. ``workers`` therefore only bounds concurrency.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

WORKERS_ENV_VAR = "BELLSIM_WORKERS"


def resolve_workers(workers: int | None) -> int:
    """Explicit argument, else the BELLSIM_WORKERS variable, else 1."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV_VAR)
        workers = int(raw) if raw else 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def map_trial_chunks(
    fn: Callable[[int, int], tuple[np.ndarray, ...]],
    n: int,
    workers: int | None,
) -> tuple[np.ndarray, ...]:
    """Evaluate ``fn(start, count)`` over a partition of [0, n), in order.

    ``fn`` must be a pure function of the trial index range. Returns the
    per-chunk arrays concatenated along axis 0.
    """
    workers = resolve_workers(workers)
    if workers == 1 or n < 2 * workers:
        return fn(0, n)
    bounds = np.linspace(0, n, workers + 1, dtype=int)
    jobs = [(int(lo), int(hi - lo)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda job: fn(*job), jobs))
    return tuple(np.concatenate(cols) for cols in zip(*parts))
