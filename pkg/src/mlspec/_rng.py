"""Seed derivation helpers.

All randomness in the library flows through numpy Generators whose seeds
are derived with :func:`subseed`, a stated 64-bit hash of the base seed
plus structured context (layer index, restart index, ...).  Sub-tasks can
therefore run in any order (or in parallel) without changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def subseed(seed: int, *parts) -> int:
    """Derive a 64-bit sub-seed from a base seed and context labels.

    Uses BLAKE2b over the repr of the tuple; stable across processes and
    platforms (unlike Python's builtin ``hash``).
    """
    payload = repr((int(seed),) + tuple(parts)).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int, *parts) -> np.random.Generator:
    """Generator seeded by ``subseed(seed, *parts)``."""
    return np.random.default_rng(subseed(seed, *parts))
