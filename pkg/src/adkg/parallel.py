"""Seeded work splitting.

Each unit of work gets its own random stream derived from the master seed and
the unit's index, so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def substream(seed: int, index: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index), *tags)))


def pmap(fn, items, workers: int = 1) -> list:
    """Ordered map, optionally on a thread pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def derived_seed(seed: int, *tags) -> int:
    """Stable integer seed for a named unit of work (tags may be strings)."""
    key = tuple(zlib.crc32(str(t).encode()) for t in tags)
    return int(np.random.SeedSequence(int(seed), spawn_key=key).generate_state(1, np.uint32)[0])
