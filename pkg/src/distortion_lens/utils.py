"""Small shared helpers: worker-count policy and stable seed derivation."""

from __future__ import annotations

import os
import zlib

import numpy as np

THREADS_ENV = "DISTORTION_LENS_THREADS"


def worker_count() -> int:
    """Worker cap from DISTORTION_LENS_THREADS; 0 or unset means auto."""
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def stable_seed(base_seed: int, *parts: str | int) -> int:
    """Deterministic sub-seed from a base seed and string/int identifiers.

    Independent of execution order or platform hash randomization, so results
    do not depend on how work is scheduled across threads.
    """
    words = [np.uint32(base_seed & 0xFFFFFFFF), np.uint32((base_seed >> 32) & 0xFFFFFFFF)]
    for part in parts:
        if isinstance(part, int):
            words.append(np.uint32(part & 0xFFFFFFFF))
        else:
            words.append(np.uint32(zlib.crc32(str(part).encode("utf-8"))))
    ss = np.random.SeedSequence([int(w) for w in words])
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)
