"""Splittable counter-based random streams.

Every stream is a master seed plus a tuple of integer indices.  The
generator behind a stream is a Philox counter-based bit generator keyed by
``SeedSequence(seed, spawn_key=indices)``, so the draws obtained from a
sub-stream depend only on its index path and never on the order in which
other sub-streams were consumed.  This is what makes chunked, multi-worker
sampling reproducible.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar, Union

import numpy as np

T = TypeVar("T")

# Fixed role indices so that two samplers sharing a seed also share the
# theta / simulation draws (needed for the degenerate-prior equivalences).
THETA = 0
ERROR = 1
SIMULATE = 2
ACCEPT = 3
PILOT = 4

CHUNK_SIZE = 2**16
THREADS_ENV = "ABC_CRITIC_THREADS"


@dataclass(frozen=True)
class RngStream:
    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def substream(self, *indices: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))


RngLike = Union[RngStream, np.random.Generator, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(int(rng)).generator()


def as_stream(rng: RngStream | int) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, np.random.Generator):
        raise TypeError("samplers need an RngStream (or an integer seed), not a Generator")
    return RngStream(int(rng))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else $ABC_CRITIC_THREADS, else 1."""
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else 1
    return max(1, int(workers))


def chunk_sizes(n: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[int, int], T], n: int, workers: int | None = None,
               chunk: int = CHUNK_SIZE) -> list[T]:
    """Apply ``fn(chunk_index, chunk_size)`` over the chunks of ``n`` items.

    Results come back ordered by chunk index whatever the worker count.
    """
    sizes = chunk_sizes(n, chunk)
    workers = resolve_workers(workers)
    if workers == 1 or len(sizes) <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, i, s) for i, s in enumerate(sizes)]
        return [f.result() for f in futures]
