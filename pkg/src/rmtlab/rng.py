"""Reproducible, independent random streams.

Streams are keyed by ``(master_seed, stream_id)`` and built on numpy's
``SeedSequence`` spawn keys, so distinct stream ids give independent
generators and equal keys give bit-identical sequences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise InvalidArgumentError("master_seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise InvalidArgumentError("stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "RngStream":
        """Derived stream, distinct from every other ``(seed, id)`` in use.

        Child ids are interleaved above the user range so that
        ``child(k)`` of stream ``i`` never collides with stream ``j``.
        """
        return RngStream(self.master_seed, (int(self.stream_id) + 1) * 1_000_003 + int(index))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator or an int seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise InvalidArgumentError(f"cannot build a generator from {type(rng).__name__}")
