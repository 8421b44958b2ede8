"""Seed handling.

Every random choice in the library flows from a 64-bit root seed. Trials,
sweep points and audit sides get their own streams through a counter-based
split, so results never depend on scheduling order.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(root: int, *counters: int) -> int:
    """Derive a child 64-bit seed from ``root`` and a path of counters."""
    ss = np.random.SeedSequence(entropy=int(root) & MASK64, spawn_key=tuple(int(c) for c in counters))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required for reproducibility")
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def child_rng(rng: np.random.Generator) -> np.random.Generator:
    """Independent stream derived from ``rng`` (consumes one draw)."""
    return make_rng(int(rng.integers(0, 1 << 63)))
