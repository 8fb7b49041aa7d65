"""Seeded random streams shared by data generation and fitting."""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng"]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator for ``(seed, stream)``; streams are independent."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))
