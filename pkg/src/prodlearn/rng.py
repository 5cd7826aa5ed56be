"""Keyed random streams.

Every random draw in the package comes from a Philox (counter-based) generator
whose key is derived from a base seed plus a tuple of stream identifiers, e.g.
``stream(seed, "sweep", N, trial)``. Two callers using different identifiers
never share state, and a result depends only on its key, not on call order.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _word(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (bool, np.bool_)):
        return int(part)
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    raise TypeError(f"stream key parts must be str or int, got {type(part).__name__}")


def seed_sequence(seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(_word(k) for k in key))


def stream(seed: int, *key) -> np.random.Generator:
    """Return an independent generator for ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))
