"""Seed derivation.

Every random stream in the package is addressed by a root seed plus a path of
keys, e.g. ``rng(seed, "er", realization, attempt)``.  The path is mapped onto
numpy's ``SeedSequence`` spawn key (string keys become the first 32 bits of
their SHA-256), so any realization of a run can be regenerated in isolation
without replaying the ones before it.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def _key_int(key: int | str) -> int:
    if isinstance(key, str):
        return int.from_bytes(hashlib.sha256(key.encode()).digest()[:4], "little")
    if key < 0:
        raise ValueError(f"seed path keys must be non-negative, got {key}")
    return int(key)


def seed_sequence(seed: int, *path: int | str) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=tuple(_key_int(k) for k in path))


def rng(seed: int, *path: int | str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def derive_seed(seed: int, *path: int | str) -> int:
    """A 64-bit integer seed for the stream at ``path``; stable across runs."""
    return int(seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0])
