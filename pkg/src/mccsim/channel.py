"""Beamforming gains and channel-inversion power control."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _layout as lay
from ._rng import TrialStream
from .errors import InvalidParameter, SingularityError
from .geometry import serving_distance_from_uniform


@dataclass(frozen=True)
class ScatteringModel:
    """Statistical beam model.

    Sparse scattering: main lobe ``W ~ U[delta, delta_prime]``, side lobe
    ``G ~ U[0, gamma]``.  Rich scattering: ``W | N=n ~ Gamma(n, 1)`` and
    ``G ~ Exp(1)``, with the diversity order ``N`` drawn from
    ``diversity_pmf``.
    """

    kind: str = "sparse"
    delta: float = 6.0
    delta_prime: float = 10.0
    gamma: float = 1.0
    diversity_pmf: dict = field(default_factory=lambda: {3: 1.0})

    def __post_init__(self):
        if self.kind == "sparse":
            if not (0 < self.delta <= self.delta_prime):
                raise InvalidParameter("need 0 < delta <= delta_prime")
            if not self.gamma > 0:
                raise InvalidParameter("gamma must be positive")
        elif self.kind == "rich":
            pmf = self.diversity_pmf
            if not pmf or any(int(n) != n or n < 1 for n in pmf) or any(p < 0 for p in pmf.values()):
                raise InvalidParameter("diversity pmf must map positive integers to probabilities")
            if not math.isclose(sum(pmf.values()), 1.0, abs_tol=1e-9):
                raise InvalidParameter("diversity pmf must sum to 1")
            if self.nu < 2:
                raise InvalidParameter("minimum diversity order must exceed 1")
        else:
            raise InvalidParameter(f"unknown scattering kind {self.kind!r}")

    @classmethod
    def sparse(cls, delta=6.0, delta_prime=10.0, gamma=1.0) -> "ScatteringModel":
        return cls("sparse", delta, delta_prime, gamma)

    @classmethod
    def rich(cls, diversity_pmf=None) -> "ScatteringModel":
        return cls("rich", diversity_pmf=dict(diversity_pmf or {3: 1.0}))

    @property
    def support(self) -> np.ndarray:
        return np.array(sorted(n for n, p in self.diversity_pmf.items() if p > 0), dtype=np.int64)

    @property
    def nu(self) -> int:
        return int(self.support[0])

    @property
    def pr_nu(self) -> float:
        return float(self.diversity_pmf[self.nu])

    @property
    def nmax(self) -> int:
        """Unit exponentials reserved per BS in a trial stream (0 when sparse)."""
        return int(self.support[-1]) if self.kind == "rich" else 0

    def diversity_cdf(self) -> np.ndarray:
        s = self.support
        return np.cumsum([self.diversity_pmf[int(n)] for n in s])


@dataclass
class GainDraw:
    main_lobe: float
    side_lobes: np.ndarray
    interferer_serving_distances: np.ndarray
    interferer_main_lobes: np.ndarray

    def __post_init__(self):
        n = len(self.side_lobes)
        if len(self.interferer_serving_distances) != n or len(self.interferer_main_lobes) != n:
            raise InvalidParameter("gain lists must match the interferer count")


def sample_serving_distance(density: float, rng: np.random.Generator, size=None):
    """Draw ``L`` with ``Pr(L > x) = exp(-pi * density * x**2)``."""
    if density <= 0:
        raise InvalidParameter("density must be positive")
    u = 1.0 - rng.random(size)  # (0, 1]
    return serving_distance_from_uniform(u, density)


def sample_sparse_gains(model: ScatteringModel, n_interferers: int, density: float,
                        rng: np.random.Generator) -> GainDraw:
    if model.kind != "sparse":
        raise InvalidParameter("model is not sparse")
    w = rng.uniform(model.delta, model.delta_prime, n_interferers + 1)
    g = rng.uniform(0.0, model.gamma, n_interferers)
    L = sample_serving_distance(density, rng, n_interferers)
    return GainDraw(float(w[0]), g, L, w[1:])


def _rich_main_lobes(model: ScatteringModel, size: int, rng: np.random.Generator) -> np.ndarray:
    n = rng.choice(model.support, size=size, p=[model.diversity_pmf[int(k)] for k in model.support])
    return rng.gamma(n.astype(float), 1.0)


def sample_rich_gains(model: ScatteringModel, n_interferers: int, density: float,
                      rng: np.random.Generator) -> GainDraw:
    if model.kind != "rich":
        raise InvalidParameter("model is not rich")
    w = _rich_main_lobes(model, n_interferers + 1, rng)
    g = rng.exponential(1.0, n_interferers)
    L = sample_serving_distance(density, rng, n_interferers)
    return GainDraw(float(w[0]), g, L, w[1:])


def sample_gains(model: ScatteringModel, n_interferers: int, density: float,
                 rng: np.random.Generator) -> GainDraw:
    if model.kind == "sparse":
        return sample_sparse_gains(model, n_interferers, density, rng)
    return sample_rich_gains(model, n_interferers, density, rng)


def main_lobes_from_uniforms(model: ScatteringModel, u_main, u_exp=None) -> np.ndarray:
    """Main-lobe gains from stream uniforms.

    ``u_main`` is one uniform per BS; for rich scattering it selects the
    diversity order and ``u_exp`` (shape ``(nmax, n)``) feeds the unit
    exponentials, summed in slot order.
    """
    u_main = np.asarray(u_main, dtype=float)
    if model.kind == "sparse":
        return model.delta + (model.delta_prime - model.delta) * u_main
    n = model.support[np.searchsorted(model.diversity_cdf(), u_main, side="right").clip(max=len(model.support) - 1)]
    w = np.zeros_like(u_main)
    for j in range(model.nmax):
        w = w + np.where(j < n, -np.log(u_exp[j]), 0.0)
    return w


def side_lobes_from_uniforms(model: ScatteringModel, u_side) -> np.ndarray:
    u_side = np.asarray(u_side, dtype=float)
    if model.kind == "sparse":
        return model.gamma * u_side
    return -np.log(u_side)


def trial_gains(model: ScatteringModel, ids: np.ndarray, density: float, stream: TrialStream) -> GainDraw:
    """Gains of the serving BS and of the background BSs ``ids`` for one trial."""
    nmax = model.nmax
    base = np.concatenate([[lay.serving_base()], lay.point_base(ids, nmax)]).astype(np.int64)
    u_main = stream.at(base + lay.P_MAIN)
    u_exp = [stream.at(base + lay.P_EXP0 + j) for j in range(nmax)]
    w = main_lobes_from_uniforms(model, u_main, u_exp)
    g = side_lobes_from_uniforms(model, stream.at(base[1:] + lay.P_SIDE))
    L = serving_distance_from_uniform(stream.at(base[1:] + lay.P_SERVING), density)
    return GainDraw(float(w[0]), g, L, w[1:])


def zf_gain_oracle(q_antennas: int, m_cluster: int, rng: np.random.Generator, size: int | None = None):
    """Explicit zero-forcing beamformer on i.i.d. CN(0, 1) channels.

    The beamformer is the normalised projection of the data channel onto the
    orthogonal complement of the ``m_cluster - 1`` interference channels.
    Returns ``(W, G)``: the main-lobe power ``|f^H h|^2`` and the power
    ``|f^H q|^2`` toward one fresh independent channel ``q``.  With ``size``
    both are arrays.
    """
    if m_cluster < 1 or q_antennas < m_cluster:
        raise InvalidParameter("zero forcing needs q_antennas >= m_cluster >= 1")
    n = 1 if size is None else size

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)

    h = cn(n, q_antennas)
    if m_cluster > 1:
        basis, _ = np.linalg.qr(cn(n, q_antennas, m_cluster - 1))
        h = h - np.einsum("nij,nj->ni", basis, np.einsum("nij,ni->nj", basis.conj(), h))
    f = h / np.linalg.norm(h, axis=1, keepdims=True)
    w = np.abs(np.einsum("ni,ni->n", f.conj(), h)) ** 2
    g = np.abs(np.einsum("ni,ni->n", f.conj(), cn(n, q_antennas))) ** 2
    if size is None:
        return float(w[0]), float(g[0])
    return w, g


def channel_inversion_power(omega, serving_distance, main_lobe, alpha):
    """Transmit power ``omega * L**alpha / W`` that delivers ``omega`` at the mobile."""
    if np.any(np.asarray(main_lobe) == 0):
        raise SingularityError("zero main-lobe gain")
    return omega * np.asarray(serving_distance, dtype=float) ** alpha / main_lobe
