"""Seed derivation: every random stream descends from one master seed."""

from __future__ import annotations

import numpy as np


def derived_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for a (seed, *path) slot, stable across runs and workers."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))
