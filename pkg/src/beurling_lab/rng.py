"""Counter-based random streams.

A stream is keyed by (seed, stream_id). Draws are produced in fixed-size
blocks; block j uses a Philox generator whose counter starts at j in the
high word, so any block can be regenerated on its own and the output does
not depend on how blocks are distributed over threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .parallel import pmap

BLOCK = 1 << 16
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def generator(self, block: int = 0) -> np.random.Generator:
        key = int(self.seed) | (int(self.stream_id) << 64)
        counter = np.array([0, 0, 0, block], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))


def blocked_draws(rng: RngStream, count: int, draw, threads: int = 1) -> np.ndarray:
    """Concatenate ``draw(generator, size)`` over the blocks covering ``count``."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    nblocks = -(-count // BLOCK)
    sizes = [min(BLOCK, count - j * BLOCK) for j in range(nblocks)]
    parts = pmap(lambda j: draw(rng.generator(j), sizes[j]), range(nblocks), threads)
    return np.concatenate(parts)
