"""Deterministic chunked execution of per-sample ensemble work.

Every sample of an ensemble is a pure function of its own substream, so the
per-sample results form a fixed array no matter how the index range is split
across workers.  Chunks are always concatenated in index order, which makes
the reduction bit-for-bit identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np


def index_chunks(n: int, n_chunks: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into at most ``n_chunks`` contiguous pieces."""
    n_chunks = max(1, min(n_chunks, n))
    bounds = np.linspace(0, n, n_chunks + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_chunked(worker: Callable, payloads: Sequence, workers: int) -> list:
    """Run ``worker`` over payloads, serially or on a process pool.

    Results are returned in payload order regardless of scheduling.
    """
    if workers <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, payloads))


def gather_samples(worker: Callable, n_samples: int, workers: int,
                   make_payload: Callable[[int, int], object]) -> np.ndarray:
    """Concatenate per-sample arrays computed chunk by chunk in index order."""
    chunks = index_chunks(n_samples, max(workers, 1) * 4)
    payloads = [make_payload(a, b) for a, b in chunks]
    parts = run_chunked(worker, payloads, workers)
    return np.concatenate(parts, axis=0)
