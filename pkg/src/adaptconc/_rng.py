"""Seed derivation shared by both kernel backends.

Random numbers come from SplitMix64: the state advances by the golden-ratio
increment ``0x9E3779B97F4A7C15`` and each output is the state passed through the
``mix64`` finaliser below. A uniform double is ``(out >> 11) * 2**-53``.

Trial ``i`` of a run with master seed ``m`` starts from
``mix64(mix64(m) + GOLDEN * (i + 1))`` (arithmetic mod 2**64), so the result of
any trial depends only on ``(m, i)`` and never on scheduling.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# relative slack when comparing D against the threshold; ties count as violations
TIE_TOL = 1e-9


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def trial_seed(master_seed: int, index: int) -> int:
    return mix64(mix64(master_seed) + GOLDEN * (index + 1))


def trial_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Seeds for trials ``start .. stop-1`` as a uint64 array."""
    idx = np.arange(start + 1, stop + 1, dtype=np.uint64)
    base = np.uint64(mix64(master_seed))
    return mix64_array(base + idx * np.uint64(GOLDEN))
