"""Counter-based random number streams.

Every stochastic routine in this package draws from a Philox (counter-based)
generator whose 128-bit key is derived by hashing a master seed together with
an integer path, e.g. ``(seed, replica_index)`` or ``(seed, replica, lane)``.
Streams for distinct paths are statistically independent, so replicas can be
computed in any order, on any number of workers, with identical results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 sequence; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def stream_key(seed: int, *path: int) -> tuple[int, int]:
    """Derive a 2x64-bit Philox key from a seed and an integer path."""
    state = seed & _MASK64
    for part in path:
        state, out = _splitmix64(state ^ (part & _MASK64))
        state ^= out
    state, k0 = _splitmix64(state)
    state, k1 = _splitmix64(state)
    return k0, k1


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the given (seed, path) combination."""
    k0, k1 = stream_key(seed, *path)
    return np.random.Generator(np.random.Philox(key=np.array([k0, k1], dtype=np.uint64)))
