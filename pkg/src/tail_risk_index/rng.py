"""
Reproducible random streams.

Each stream is a counter-based Philox generator keyed by the run seed and a
tuple of integer indices, so any repetition or component can be regenerated
on its own regardless of how work is scheduled across threads.

Stream keys used by the toolkit:

    (seed, 0)                        copula scenario sampling
    (seed, 1)                        kernel VaR-contribution noise
    (seed, copula_index, repetition) stress-test repetitions
    (seed, size_index, replication)  empirical consistency probe
"""

from typing import Tuple

import numpy as np

from .exceptions import RiskDomainError

SCENARIO_STREAM = 0
KERNEL_NOISE_STREAM = 1


def stream_key(seed: int, *keys: int) -> Tuple[int, ...]:
    parts = (seed, *keys)
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (int, np.integer)) or part < 0:
            raise RiskDomainError(f"seeds and stream keys must be non-negative integers (got {part!r})")
    return tuple(int(part) for part in parts)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, *keys)``."""
    seed, *path = stream_key(seed, *keys)
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(sequence))
