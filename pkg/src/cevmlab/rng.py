"""Counter-based random streams keyed by ``(seed, stream index)``.

Every chunk of a sample is drawn from its own Philox stream, so a sample of
size ``n`` is reproducible whatever the number of workers and is a prefix of
any larger sample drawn with the same seed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 1 << 16
THREADS_ENV = "CEVMLAB_THREADS"


def stream(seed: int, index: int, *, domain: int = 0) -> np.random.Generator:
    """Independent generator for chunk ``index`` of ``seed``.

    ``domain`` separates unrelated consumers sharing a seed (e.g. the
    conditional samplers of different t-grid points).
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunked(fn, seed: int, n: int, *, chunk: int = CHUNK_SIZE, domain: int = 0, workers: int | None = None):
    """Concatenate ``fn(rng, chunk)`` over as many chunks as needed for ``n`` rows.

    ``fn`` must return an array whose first axis has length ``chunk``; every
    chunk is drawn at full size and the result is truncated to ``n`` rows.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    n_chunks = -(-n // chunk)
    if n_chunks == 0:
        return fn(stream(seed, 0, domain=domain), chunk)[:0]
    workers = worker_count() if workers is None else workers

    def run(i):
        return fn(stream(seed, i, domain=domain), chunk)

    if workers <= 1 or n_chunks == 1:
        parts = [run(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    return np.concatenate(parts, axis=0)[:n]
