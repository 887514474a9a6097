"""Monte Carlo outage engine.

Two paths compute the same numbers.  The reference path builds explicit
:class:`~mccsim.geometry.NetworkRealization` and :class:`~mccsim.channel.GainDraw`
objects for one trial; the batch path (:mod:`mccsim.kernels`) evaluates many
trials at once in compiled code or numpy.  Both read trial ``t`` from the
stream keyed by ``(seed, t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from ._rng import TrialStream
from .channel import (GainDraw, ScatteringModel, channel_inversion_power, main_lobes_from_uniforms,
                      sample_serving_distance, side_lobes_from_uniforms, trial_gains)
from .errors import InvalidParameter, SingularityError
from .geometry import (NetworkRealization, apothem_for_ell, disk_radius_for_count, hex_norm,
                       ring_index, sample_realization)

DEFAULT_SEED = 20120601
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    density: float = 1e-2
    cluster_size: float = 1.0
    alpha: float = 4.0
    theta: float = 3.0
    omega: float = 1.0
    scattering: ScatteringModel = field(default_factory=ScatteringModel.sparse)
    scenario: str = "cluster-center"
    trials: int = 10**6
    seed: int = DEFAULT_SEED
    disk_radius: float | None = None

    def __post_init__(self):
        if not self.density > 0:
            raise InvalidParameter("density must be positive")
        if not self.alpha > 2:
            raise InvalidParameter("path-loss exponent must exceed 2")
        if not self.theta > 0:
            raise InvalidParameter("theta must be positive")
        if not self.cluster_size > 0:
            raise InvalidParameter("cluster size must be positive")
        if not self.omega > 0:
            raise InvalidParameter("omega must be positive")
        if self.trials < 1:
            raise InvalidParameter("need at least one trial")
        if self.scenario not in ("cluster-center", "typical", "no-mcc"):
            raise InvalidParameter(f"unknown scenario {self.scenario!r}")
        if self.disk_radius is None:
            object.__setattr__(self, "disk_radius", disk_radius_for_count(self.density))
        elif not self.disk_radius > 0:
            raise InvalidParameter("disk radius must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must fit in 64 bits")

    @property
    def apothem(self) -> float:
        return apothem_for_ell(self.cluster_size, self.density)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    outage_count: int
    ope_hat: float | None

    @property
    def ope_available(self) -> bool:
        return self.ope_hat is not None


@dataclass(frozen=True)
class TailCurve:
    thresholds: np.ndarray
    tail_probs: np.ndarray
    kind: str = "empirical"


@dataclass(frozen=True)
class RingBoundReport:
    trials: int
    upper_violations: int
    lower_violations: int
    min_upper_slack: float
    min_lower_slack: float

    @property
    def ok(self) -> bool:
        return self.upper_violations == 0 and self.lower_violations == 0


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    p = k / n
    denom = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


def interference_power(realization: NetworkRealization, gains: GainDraw, cfg: SimConfig) -> float:
    """Sum of channel-inverted interferer powers times side lobes times path loss."""
    pts = realization.interferers.points
    if len(pts) != len(gains.side_lobes):
        raise InvalidParameter("gains do not match the interferer count")
    if len(pts) == 0:
        return 0.0
    u = realization.typical_mobile
    d2 = (pts[:, 0] - u.x) ** 2 + (pts[:, 1] - u.y) ** 2
    if np.any(d2 == 0):
        raise SingularityError("interferer coincides with the mobile")
    p = channel_inversion_power(cfg.omega, gains.interferer_serving_distances, gains.interferer_main_lobes, cfg.alpha)
    terms = p * gains.side_lobes * d2 ** (-cfg.alpha / 2)
    return float(np.cumsum(terms)[-1])


def trial_interference(cfg: SimConfig, trial: int) -> float:
    """Reference evaluation of trial ``trial`` through explicit realization objects."""
    stream = TrialStream.for_trial(cfg.seed, trial)
    real = sample_realization(cfg, None, stream)
    gains = trial_gains(cfg.scattering, real.interferer_ids, cfg.density, stream)
    return interference_power(real, gains, cfg)


def run_outage_trial(cfg: SimConfig, rng: TrialStream) -> bool:
    """Outage indicator ``I > omega / theta`` for the trial behind ``rng``."""
    real = sample_realization(cfg, None, rng)
    gains = trial_gains(cfg.scattering, real.interferer_ids, cfg.density, rng)
    return interference_power(real, gains, cfg) > cfg.omega / cfg.theta


def simulate_interference(cfg: SimConfig, threads: int = 0, start: int = 0, count: int | None = None) -> np.ndarray:
    """Interference of trials ``start .. start+count`` (default: all ``cfg.trials``)."""
    count = cfg.trials if count is None else count
    return kernels.interference_batch(cfg, start, count, threads=threads)


def outage_from_interference(interference: np.ndarray, omega: float, theta: float) -> OutageEstimate:
    n = len(interference)
    k = int(np.count_nonzero(interference > omega / theta))
    if k == 0:
        return OutageEstimate(0.0, 0.0, min(1.0, 3.0 / n), n, 0, None)
    lo, hi = wilson_interval(k, n)
    p = k / n
    return OutageEstimate(p, lo, hi, n, k, -math.log(p))


def estimate_outage(cfg: SimConfig, threads: int = 0) -> OutageEstimate:
    """Outage probability over ``cfg.trials`` trials with a 95% Wilson interval.

    With no outages the estimate is 0, ``ope_hat`` is ``None`` and the upper
    limit is the rule-of-three bound ``3 / trials``.
    """
    return outage_from_interference(simulate_interference(cfg, threads), cfg.omega, cfg.theta)


def sample_pg(cfg: SimConfig, size: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. products ``P_Y * G`` of a channel-inverted BS and its side lobe."""
    model = cfg.scattering
    L = sample_serving_distance(cfg.density, rng, size)
    u_main = rng.random(size)
    u_exp = 1.0 - rng.random((model.nmax, size)) if model.kind == "rich" else None
    w = main_lobes_from_uniforms(model, u_main, u_exp)
    g = side_lobes_from_uniforms(model, 1.0 - rng.random(size))
    return channel_inversion_power(cfg.omega, L, w, cfg.alpha) * g


def sample_Zn_batch(cfg: SimConfig, size: int, rng: np.random.Generator, chunk: int = 1 << 20) -> np.ndarray:
    """Compound Poisson sums of ``Poisson(ell)`` i.i.d. ``P*G`` terms."""
    counts = rng.poisson(cfg.cluster_size, size)
    out = np.empty(size)
    lo = 0
    while lo < size:
        c = counts[lo:lo + chunk]
        terms = sample_pg(cfg, int(c.sum()), rng)
        owner = np.repeat(np.arange(len(c)), c)
        out[lo:lo + len(c)] = np.bincount(owner, weights=terms, minlength=len(c))
        lo += chunk
    return out


def sample_Zn(cfg: SimConfig, rng: np.random.Generator) -> float:
    return float(sample_Zn_batch(cfg, 1, rng)[0])


def check_ring_bounds(cfg: SimConfig, trials: int, epsilon: float = 0.2) -> RingBoundReport:
    """Per-realization check of the ring upper bound and narrow-ring lower bound.

    For each cluster-center trial the interference is compared with two
    coupled sums over the same interferers and gains: every interferer in
    ring ``n`` weighted by ``(sqrt(n) rho)**-alpha`` (upper), and every
    interferer in the narrow ring ``C(sqrt(1+eps) rho) minus C(rho)``
    weighted by ``((1+eps) * circumradius)**-alpha`` (lower).
    """
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    cfg = cfg.with_(scenario="cluster-center")
    rho = cfg.apothem
    rho_t = 2.0 * rho / math.sqrt(3.0)
    up_bad = lo_bad = 0
    up_slack = lo_slack = math.inf
    for t in range(trials):
        stream = TrialStream.for_trial(cfg.seed, t)
        real = sample_realization(cfg, None, stream)
        gains = trial_gains(cfg.scattering, real.interferer_ids, cfg.density, stream)
        exact = interference_power(real, gains, cfg)
        pts = real.interferers.points
        pg = channel_inversion_power(cfg.omega, gains.interferer_serving_distances,
                                     gains.interferer_main_lobes, cfg.alpha) * gains.side_lobes
        n = ring_index((0.0, 0.0), rho, pts)
        upper = float(np.sum(pg * (np.sqrt(n) * rho) ** (-cfg.alpha))) if len(pts) else 0.0
        in_eps = hex_norm((0.0, 0.0), pts) <= math.sqrt(1 + epsilon) * rho
        lower = float(np.sum(pg[in_eps])) * ((1 + epsilon) * rho_t) ** (-cfg.alpha) if len(pts) else 0.0
        up_bad += exact > upper
        lo_bad += lower > exact
        up_slack = min(up_slack, upper - exact)
        lo_slack = min(lo_slack, exact - lower)
    return RingBoundReport(trials, int(up_bad), int(lo_bad), up_slack, lo_slack)


def empirical_tail(samples, thresholds) -> TailCurve:
    """Fraction of ``samples`` strictly above each threshold."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise InvalidParameter("no samples")
    t = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InvalidParameter("thresholds must be strictly increasing")
    above = x.size - np.searchsorted(x, t, side="right")
    return TailCurve(t, above / x.size, "empirical")
