"""Seed splitting for reproducible random streams.

All randomness flows through numpy's PCG64 bit generator seeded by a
``SeedSequence``. Substreams are addressed by a spawn key, so any stream can
be regenerated from (master seed, key) alone, independent of execution order
or worker count:

* synthetic class centres      -> key (0,)
* synthetic subject ``s``      -> key (1, s)
* synthetic trial ``(s, k, j)`` -> key (2, s, k, j)
* calibration split            -> entropy (master seed, subject hash, repetition)
"""

from __future__ import annotations

import hashlib

import numpy as np

_UINT64 = 2**64


def rng_for(seed: int, *key: int) -> np.random.Generator:
    if not 0 <= seed < _UINT64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def subject_hash(subject_id: str) -> int:
    """Stable 64-bit hash of a subject id (first 8 bytes of SHA-256, little-endian)."""
    digest = hashlib.sha256(subject_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def split_rng(master_seed: int, subject_id: str, repetition: int) -> np.random.Generator:
    entropy = [master_seed, subject_hash(subject_id), repetition]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
