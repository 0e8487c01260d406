"""Per-task random streams derived from a master seed.

A task's generator depends only on ``(master_seed, *key)``, never on the
order or process in which tasks run.
"""

import zlib

import numpy as np


def _key_int(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("seed keys must be non-negative")
        return int(part)
    return zlib.crc32(str(part).encode())


def task_seed(master_seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(_key_int(k) for k in key))


def task_rng(master_seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(task_seed(master_seed, *key))


def derive_seed(master_seed: int, *key) -> int:
    """A 32-bit integer seed for APIs that take plain ints."""
    return int(task_seed(master_seed, *key).generate_state(1)[0])
