"""Counter-based derivation of independent random streams from one seed.

Partition ``p`` of task ``t`` run under master ``seed`` draws from
``Generator(PCG64(SeedSequence(seed, spawn_key=(t, p))))``, so a run is
bit-identical for a fixed ``(seed, partitions)`` pair whatever the worker
count or completion order.
"""

from __future__ import annotations

import numpy as np

# task identifiers in the spawn key
PROTOCOL_TASK = 1
ATTACK_TASK = 2

SEED_MASK = (1 << 64) - 1


def stream(seed: int, task: int, partition: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(int(task), int(partition)))
    return np.random.Generator(np.random.PCG64(ss))


def split_counts(total: int, partitions: int) -> list[int]:
    """Sizes of ``partitions`` near-equal consecutive chunks of ``total``."""
    base, extra = divmod(int(total), int(partitions))
    return [base + (1 if i < extra else 0) for i in range(partitions)]


def derive_seed(seed: int, *counters: int) -> int:
    """64-bit child seed for sub-task ``counters`` of a sweep."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(c) for c in counters))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
