"""
Deterministic random streams.

Every random draw in the simulator comes from a generator derived from
(global seed, purpose tag, indices...). Two runs with the same seed see the
same draws for the same purpose regardless of which other purposes were
consumed, so toggling diagnostics never moves the training trajectory.
"""

import hashlib
from typing import Dict

import numpy as np

_TAG_CACHE: Dict[str, int] = {}


def purpose_key(tag: str) -> int:
    """Stable 32-bit integer for a purpose tag."""
    key = _TAG_CACHE.get(tag)
    if key is None:
        key = int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:4], "little")
        _TAG_CACHE[tag] = key
    return key


class StreamFactory:
    """Derives independent numpy generators from a global seed."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        self._seed = int(seed)

    @property
    def seed(self) -> int:
        return self._seed

    def stream(self, purpose: str, *indices: int) -> np.random.Generator:
        """Generator for (seed, purpose, indices)."""
        spawn_key = (purpose_key(purpose),) + tuple(int(i) for i in indices)
        sequence = np.random.SeedSequence(entropy=self._seed, spawn_key=spawn_key)
        return np.random.Generator(np.random.PCG64(sequence))


def stream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Shortcut for StreamFactory(seed).stream(purpose, *indices)."""
    return StreamFactory(seed).stream(purpose, *indices)
