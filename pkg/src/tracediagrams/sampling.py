"""Seeded integer samples; one generator per (seed, trial) pair."""

from __future__ import annotations

import numpy as np

DEFAULT_RANGE = (-9, 9)
FRESH_OFFSET = 1_000_000  # trial indices used for hold-out samples


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def random_matrix(rng: np.random.Generator, n: int, entry_range=DEFAULT_RANGE) -> list[list[int]]:
    lo, hi = entry_range
    return rng.integers(lo, hi + 1, size=(n, n)).tolist()


def random_vector(rng: np.random.Generator, n: int, entry_range=DEFAULT_RANGE) -> list[int]:
    lo, hi = entry_range
    return rng.integers(lo, hi + 1, size=n).tolist()


def random_antisymmetric(rng: np.random.Generator, n: int, entry_range=DEFAULT_RANGE) -> list[list[int]]:
    m = random_matrix(rng, n, entry_range)
    return [[0 if i == j else (m[i][j] if i < j else -m[j][i]) for j in range(n)] for i in range(n)]


def random_bindings(symbols, n: int, rng: np.random.Generator, entry_range=DEFAULT_RANGE) -> dict:
    """Matrices for ``symbols`` drawn in sorted name order."""
    return {name: random_matrix(rng, n, entry_range) for name in sorted(symbols)}
