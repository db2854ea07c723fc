"""Deterministic splittable pseudorandom streams (splitmix64).

Every Monte Carlo trial in this package owns a private stream derived from
``(master_seed, trial_index)``, so results are bit-identical no matter how
trials are batched or how many workers run them. The derivation is O(1) per
trial: the child stream's seed is the ``(index+1)``-th output of a splitmix64
generator seeded with the master seed.

Uniform variates are ``(u64 >> 11) * 2**-53``, giving floats in [0, 1) that
are reproducible across languages.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SplitMix64", "derive_seed", "derive_stream", "uniform_matrix"]

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MULT1) & _MASK
    z = ((z ^ (z >> 27)) * _MULT2) & _MASK
    return (z ^ (z >> 31)) & _MASK


class SplitMix64:
    """Minimal splitmix64 generator (Vigna's reference sequence)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = int(seed) & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def uniform(self) -> float:
        """Next float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of the ``index``-th child stream of ``master_seed``."""
    return _mix(master_seed + (index + 1) * _GAMMA)


def derive_stream(master_seed: int, index: int) -> SplitMix64:
    """Independent per-task stream for ``(master_seed, index)``."""
    return SplitMix64(derive_seed(master_seed, index))


def uniform_matrix(master_seed: int, start: int, count: int, draws: int) -> np.ndarray:
    """Uniforms for trials [start, start+count), ``draws`` per trial.

    Row i holds the first ``draws`` uniforms of ``derive_stream(master_seed,
    start + i)``, bit-identical to the scalar path. Shape (count, draws).
    """
    g = np.uint64(_GAMMA)
    idx = np.arange(start, start + count, dtype=np.uint64)
    seeds = _mix_np(np.uint64(master_seed & _MASK) + (idx + np.uint64(1)) * g)
    cols = [
        _mix_np(seeds + np.uint64(j) * g) >> np.uint64(11)
        for j in range(1, draws + 1)
    ]
    return np.stack(cols, axis=1).astype(np.float64) * 2.0**-53


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
    return z ^ (z >> np.uint64(31))
