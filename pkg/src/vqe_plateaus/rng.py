"""Seeded, splittable random streams.

Every random draw in the package goes through :func:`derive_rng`, which keys a
counter-based Philox generator by ``(seed, *labels)``.  Labels are hashed
with CRC-32 into the ``SeedSequence`` spawn key, so a stream for
``("grad-scan", "sea", 50)`` is independent of, and unaffected by, the
stream for any other label tuple.
"""

from __future__ import annotations

import zlib

import numpy as np

RNG_ID = "numpy.Philox4x64-10+SeedSequence(crc32-labels)"


def _label_key(label) -> int:
    return zlib.crc32(repr(label).encode("utf-8"))


def derive_seed_sequence(seed: int, *labels) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_label_key(x) for x in labels))


def derive_rng(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the stream named by ``labels`` under ``seed``."""
    return np.random.Generator(np.random.Philox(derive_seed_sequence(seed, *labels)))


def derive_int_seed(seed: int, *labels) -> int:
    """A 32-bit integer sub-seed, for recording in manifests."""
    return int(derive_seed_sequence(seed, *labels).generate_state(1, dtype=np.uint32)[0])
