"""Counter-based random streams.

Every Monte Carlo trial owns a stream keyed by ``(seed, trial_index)``.  Draw
``k`` of a stream is ``mix64(key + (k + 1) * GOLDEN)``, i.e. the k-th output of
a SplitMix64 generator started at ``key``.  Because any draw can be computed
from its index alone, the compiled kernel, the numpy fallback and the
per-trial reference path all see the same numbers, and trials can be
evaluated in any order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
TRIAL_MULT = 0xD1B54A32D192ED03
SEED_OFFSET = 0x243F6A8885A308D3

_U64 = np.uint64
_SH30 = _U64(30)
_SH27 = _U64(27)
_SH31 = _U64(31)
_SH11 = _U64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def trial_key(seed: int, trial: int) -> int:
    """Stream key for one trial; a pure function of (seed, trial)."""
    base = mix64((seed + SEED_OFFSET) & MASK64)
    return mix64(base ^ (((trial + 1) * TRIAL_MULT) & MASK64))


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _SH30)) * _U64(MIX1)
    z = (z ^ (z >> _SH27)) * _U64(MIX2)
    return z ^ (z >> _SH31)


def trial_keys(seed: int, trials: np.ndarray) -> np.ndarray:
    """Vectorised :func:`trial_key` over an array of trial indices."""
    base = _U64(mix64((seed + SEED_OFFSET) & MASK64))
    t = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(base ^ ((t + _U64(1)) * _U64(TRIAL_MULT)))


def uniforms_at(keys: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Open-interval uniforms ``(m + 0.5) * 2**-53`` for draw ``index`` of each key.

    ``keys`` and ``index`` broadcast against each other.
    """
    k = np.asarray(keys, dtype=np.uint64)
    i = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64_array(k + (i + _U64(1)) * _U64(GOLDEN))
    return ((z >> _SH11).astype(np.float64) + 0.5) * _INV53


class TrialStream:
    """Random-access uniform stream for a single trial.

    >>> s = TrialStream.for_trial(seed=1, trial=0)
    >>> 0.0 < s.uniform(3) < 1.0
    True
    """

    __slots__ = ("key",)

    def __init__(self, key: int):
        self.key = key & MASK64

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "TrialStream":
        return cls(trial_key(seed, trial))

    def uniform(self, index: int) -> float:
        z = mix64(self.key + (index + 1) * GOLDEN)
        return ((z >> 11) + 0.5) * _INV53

    def at(self, index) -> np.ndarray:
        """Uniforms for an array of draw indices."""
        return uniforms_at(np.uint64(self.key), np.asarray(index, dtype=np.uint64))
