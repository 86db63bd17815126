"""Per-worker seed derivation.

``derive_worker_seed(s, i)`` is the SplitMix64 output function applied to
``s + (i + 1) * 0x9E3779B97F4A7C15 (mod 2^64)``. Both steps are bijections on
64-bit integers, so seeds are distinct across workers for a fixed master seed
and across master seeds for a fixed worker. Each seed keys a Philox
counter-based generator, which gives the same stream on every platform.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def derive_worker_seed(master_seed: int, worker_index: int) -> int:
    if worker_index < 0:
        raise ValueError("worker index must be non-negative")
    z = (int(master_seed) + (worker_index + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))
