"""Slot layout of a trial's random stream.

A trial consumes draws from its :class:`~mccsim._rng.TrialStream` at fixed
offsets so that every implementation (reference, numpy batch, compiled)
reads the same uniform for the same purpose.  The compiled kernel mirrors
these constants; change both together.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import stats

HEADER = 8
H_COUNT = 0
H_RHOMBUS = 1
H_A = 2
H_B = 3
H_SERVING = 4
H_DIRECTION = 5

P_RADIUS = 0
P_ANGLE = 1
P_SERVING = 2
P_SIDE = 3
P_MAIN = 4  # sparse main lobe, or the diversity-order selector (rich)
P_EXP0 = 5  # first unit exponential of the rich main lobe

SCENARIOS = ("cluster-center", "typical", "no-mcc")
SCENARIO_CODE = {name: i for i, name in enumerate(SCENARIOS)}


def point_stride(nmax: int) -> int:
    """Draws reserved per background point; ``nmax`` is 0 for sparse scattering."""
    return P_EXP0 + nmax


def point_base(i, nmax: int):
    """First draw index of background point ``i``.

    The block at ``HEADER`` (point index -1) belongs to the serving BS.
    """
    return HEADER + (np.asarray(i) + 1) * point_stride(nmax)


def serving_base() -> int:
    return HEADER


@lru_cache(maxsize=64)
def _poisson_cdf(mean: float) -> tuple:
    if mean <= 0.0:
        return (1.0,)
    kmax = int(math.ceil(mean + 40.0 * math.sqrt(mean) + 40.0))
    k = np.arange(kmax + 1)
    cdf = stats.poisson.cdf(k, mean)
    last = int(np.argmax(stats.poisson.sf(k, mean) < 1e-17))
    return tuple(cdf[: last + 1])


def poisson_cdf_table(mean: float) -> np.ndarray:
    """CDF table used to invert a uniform into a Poisson count.

    ``count = #{k : cdf[k] <= u}``; the table extends until the survival
    function drops below 1e-17, so truncation is invisible in double precision.
    """
    return np.array(_poisson_cdf(float(mean)), dtype=np.float64)


def poisson_from_uniform(u, cdf: np.ndarray):
    return np.searchsorted(cdf, u, side="right")
