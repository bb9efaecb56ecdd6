"""Counter-based random streams.

Every random draw in this package flows through a Philox generator keyed by
a 64-bit seed plus a stream index.  Stream ``i`` of seed ``s`` is reachable
directly from ``(s, i)``: no generator state is advanced sequentially, so
hash function ``i`` of an index, or trial block ``j`` of an estimate, can be
reproduced in isolation.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(value: int) -> int:
    """One step of the splitmix64 mixing function (64-bit output)."""
    z = (value + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of substream ``index`` from a master seed.

    The map is a splitmix64 mix of both inputs, so distinct (seed, index)
    pairs give unrelated substream seeds without sequential dependence.
    """
    if index < 0:
        raise ValueError(f"stream index must be nonnegative, got {index}")
    return splitmix64((master_seed & _MASK64) ^ splitmix64(index))


def stream(seed: int, stream_index: int = 0) -> np.random.Generator:
    """Return the Philox generator for ``(seed, stream_index)``.

    The 128-bit Philox key is the concatenation of the seed and the stream
    index, so streams of one seed never collide with each other or with
    streams of a different seed.
    """
    if stream_index < 0:
        raise ValueError(f"stream index must be nonnegative, got {stream_index}")
    key = ((seed & _MASK64) << 64) | (stream_index & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))
