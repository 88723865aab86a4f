"""Deterministic random streams.

A stream is addressed by ``(root seed, task label, block index)``. The label
is hashed with BLAKE2b into the ``spawn_key`` of a :class:`numpy.random.SeedSequence`,
so adding a new task never shifts the streams of existing ones, and a block's
stream does not depend on which worker runs it.
"""
from __future__ import annotations

import hashlib

import numpy as np

BLOCK_SIZE = 1000


def task_key(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


def stream(seed: int, label: str, block: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1),
                                spawn_key=(task_key(label), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(n_reps: int, block_size: int = BLOCK_SIZE) -> list:
    """Partition ``range(n_reps)`` into ``(block_index, count)`` pairs."""
    out = []
    for b, start in enumerate(range(0, n_reps, block_size)):
        out.append((b, min(block_size, n_reps - start)))
    return out
