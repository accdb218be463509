"""Counter-based random words.

Every random word is a pure function of ``(seed, stream, counter)``::

    key   = mix(seed)
    base  = mix(key + (stream + 1) * GAMMA)
    word  = mix(base + (counter + 1) * GAMMA)

where ``mix`` is the SplitMix64 finaliser and all arithmetic is modulo 2**64.
No generator state is carried between calls, so clause ``i`` of a formula is
reproducible no matter how clause indices are split between workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U64 = np.uint64


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=_U64)
    z = (z ^ (z >> _U64(30))) * _U64(_M1)
    z = (z ^ (z >> _U64(27))) * _U64(_M2)
    return z ^ (z >> _U64(31))


def derive_seed(seed: int, *parts: int) -> int:
    """Fold integer coordinates into a child seed, e.g. ``(seed, m, trial)``."""
    s = mix64(seed)
    for part in parts:
        s = mix64((s + ((part + 1) & MASK64) * GAMMA) & MASK64)
    return s


def stream_bases(seed: int, streams: np.ndarray) -> np.ndarray:
    """Per-stream base words for an array of stream indices."""
    key = _U64(mix64(seed))
    streams = np.asarray(streams, dtype=_U64)
    return mix64_array(key + (streams + _U64(1)) * _U64(GAMMA))


def words(bases: np.ndarray, counter) -> np.ndarray:
    """The ``counter``-th word of each stream (``counter`` may be an array)."""
    if np.ndim(counter) == 0:
        step = _U64(((int(counter) + 1) * GAMMA) & MASK64)
        return mix64_array(bases + step)
    counter = np.asarray(counter, dtype=_U64)
    return mix64_array(bases + (counter + _U64(1)) * _U64(GAMMA))


def to_unit(w: np.ndarray) -> np.ndarray:
    """Top 53 bits of each word as a float in [0, 1)."""
    return (w >> _U64(11)).astype(np.float64) * (1.0 / (1 << 53))
