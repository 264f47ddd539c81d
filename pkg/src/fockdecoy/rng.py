"""Named, counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, name, index)``, so a
shard of work can rebuild exactly the same draws no matter which worker
picks it up or in what order shards are scheduled.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["make_stream", "stream_key"]


def stream_key(name: str) -> int:
    """Stable 32-bit integer tag for a stream name (``hash()`` is salted per process)."""
    return zlib.crc32(name.encode("utf-8"))


def make_stream(seed: int, name: str = "default", index: int = 0) -> np.random.Generator:
    """Return an independent Philox stream for ``(seed, name, index)``.

    Args:
        seed: Master seed (any non-negative integer, u64 range expected).
        name: Logical purpose of the stream, e.g. ``"session"`` or ``"hom"``.
        index: Shard or replicate number.
    """
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), stream_key(name), int(index)])
    return np.random.Generator(np.random.Philox(ss))
