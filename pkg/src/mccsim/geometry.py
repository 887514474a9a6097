"""Point processes and hexagonal cluster geometry.

Hexagons have edge normals at angles ``k*pi/3`` and are closed sets: a point
on the boundary belongs to the hexagon.  Only the central cluster region is
ever materialised; everything outside it is background.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _layout as lay
from ._rng import TrialStream
from .errors import InvalidParameter

SQRT3 = math.sqrt(3.0)

# unit edge normals, one per pair of opposite edges
_NORMALS = np.array([[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(3)])


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Hexagon:
    center: Point2
    apothem: float

    def __post_init__(self):
        if not self.apothem > 0:
            raise InvalidParameter(f"apothem must be positive, got {self.apothem}")

    @property
    def circumradius(self) -> float:
        return 2.0 * self.apothem / SQRT3

    @property
    def area(self) -> float:
        return 2.0 * SQRT3 * self.apothem**2

    def vertices(self) -> np.ndarray:
        ang = math.pi / 6 + np.arange(6) * math.pi / 3
        r = self.circumradius
        return np.column_stack([self.center[0] + r * np.cos(ang), self.center[1] + r * np.sin(ang)])


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # shape (n, 2)
    density: float
    region_radius: float

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class NetworkRealization:
    """One sampled network seen from the typical mobile.

    ``interferer_ids`` index into the background PPP of the trial; channel
    draws for an interferer are keyed to that id so that realizations that
    share a background process also share gains.
    """

    interferers: PointSet
    interferer_ids: np.ndarray
    typical_bs: Point2
    typical_mobile: Point2
    serving_distance: float
    edge_distance: float
    cluster: Hexagon
    scenario: str
    background: PointSet = field(repr=False, default=None)


def hex_norm(center, p) -> np.ndarray:
    """Hexagonal gauge of ``p - center``: the apothem of the smallest hexagon containing it."""
    d = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    return np.max(np.abs(d @ _NORMALS.T), axis=-1)


def hex_contains(hex: Hexagon, p) -> bool | np.ndarray:
    inside = hex_norm(hex.center, p) <= hex.apothem
    return bool(inside) if np.ndim(inside) == 0 else inside


def edge_distance(hex: Hexagon, p) -> float | np.ndarray:
    """Distance from an interior point to the hexagon boundary."""
    m = hex_norm(hex.center, p)
    if np.any(m > hex.apothem):
        raise InvalidParameter("point lies outside the hexagon")
    d = hex.apothem - m
    return float(d) if np.ndim(d) == 0 else d


def ring_index(center, apothem: float, p) -> np.ndarray:
    """Index n of the ring ``C(sqrt(n+1) rho) minus C(sqrt(n) rho)`` holding ``p``; 0 inside the hexagon."""
    m = hex_norm(center, p)
    n = np.maximum(np.ceil((m / apothem) ** 2).astype(np.int64) - 1, 0)
    # ceil can land one off when (m/rho)^2 is within an ulp of an integer
    n = np.where(np.sqrt(n + 1.0) * apothem < m, n + 1, n)
    n = np.where((n > 0) & (np.sqrt(n * 1.0) * apothem >= m), n - 1, n)
    return n


def hex_ring_contains(center, apothem: float, n: int, p) -> bool | np.ndarray:
    if n < 1:
        raise InvalidParameter(f"ring index must be >= 1, got {n}")
    m = hex_norm(center, p)
    inside = (m > math.sqrt(n) * apothem) & (m <= math.sqrt(n + 1) * apothem)
    return bool(inside) if np.ndim(inside) == 0 else inside


def expected_cluster_size(density: float, apothem: float) -> float:
    if density <= 0 or apothem <= 0:
        raise InvalidParameter("density and apothem must be positive")
    return 2.0 * SQRT3 * apothem**2 * density


def apothem_for_ell(ell: float, density: float) -> float:
    """Inverse of :func:`expected_cluster_size`."""
    if ell <= 0 or density <= 0:
        raise InvalidParameter("cluster size and density must be positive")
    return math.sqrt(ell / (2.0 * SQRT3 * density))


def disk_radius_for_count(density: float, count: float = 200.0) -> float:
    """Radius of the disk holding ``count`` BSs on average."""
    return math.sqrt(count / (math.pi * density))


def _disk_points(u_r, u_phi, radius: float) -> np.ndarray:
    r = radius * np.sqrt(u_r)
    phi = 2.0 * math.pi * u_phi
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def sample_ppp(density: float, disk_radius: float, rng: np.random.Generator) -> PointSet:
    """Homogeneous PPP on a centred disk."""
    if density < 0 or disk_radius <= 0:
        raise InvalidParameter("density must be >= 0 and disk_radius > 0")
    n = rng.poisson(density * math.pi * disk_radius**2)
    pts = _disk_points(rng.random(n), rng.random(n), disk_radius)
    return PointSet(pts, density, disk_radius)


def hexagon_point(hex: Hexagon, u_rhombus, u_a, u_b) -> np.ndarray:
    """Map three uniforms to a uniform point of the hexagon.

    The hexagon splits into three congruent rhombi, each spanned by two
    vertex vectors 120 degrees apart; the first uniform picks the rhombus.
    """
    u_rhombus = np.asarray(u_rhombus)
    k = np.minimum((3.0 * u_rhombus).astype(np.int64), 2)
    r = hex.circumradius
    a0 = math.pi / 6 + 2 * k * math.pi / 3
    a1 = a0 + 2 * math.pi / 3
    x = hex.center[0] + r * (u_a * np.cos(a0) + u_b * np.cos(a1))
    y = hex.center[1] + r * (u_a * np.sin(a0) + u_b * np.sin(a1))
    return np.stack([x, y], axis=-1)


def sample_in_hexagon(hex: Hexagon, size: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((3, size))
    return hexagon_point(hex, u[0], u[1], u[2])


def serving_distance_from_uniform(u, density: float):
    return np.sqrt(-np.log(u) / (math.pi * density))


def stream_ppp(stream: TrialStream, density: float, disk_radius: float, nmax: int) -> PointSet:
    """Background PPP of one trial, read from the trial's stream slots."""
    cdf = lay.poisson_cdf_table(density * math.pi * disk_radius**2)
    n = int(lay.poisson_from_uniform(stream.uniform(lay.H_COUNT), cdf))
    base = lay.point_base(np.arange(n), nmax)
    u_r = stream.at(base + lay.P_RADIUS)
    u_phi = stream.at(base + lay.P_ANGLE)
    return PointSet(_disk_points(u_r, u_phi, disk_radius), density, disk_radius)


def sample_realization(cfg, scenario: str | None, rng: TrialStream) -> NetworkRealization:
    """Sample the network around the typical mobile for one trial.

    ``cfg`` is a :class:`~mccsim.simcore.SimConfig`; ``scenario`` overrides
    ``cfg.scenario`` when given.
    """
    scenario = scenario or cfg.scenario
    if scenario not in lay.SCENARIOS:
        raise InvalidParameter(f"unknown scenario {scenario!r}")
    hexagon = Hexagon(Point2(0.0, 0.0), cfg.apothem)
    bg = stream_ppp(rng, cfg.density, cfg.disk_radius, cfg.scattering.nmax)
    pts = bg.points

    if scenario == "cluster-center":
        ybs = Point2(0.0, 0.0)
        mob = Point2(0.0, 0.0)
        L = 0.0
        D = hexagon.apothem
        keep = hex_norm(hexagon.center, pts) > hexagon.apothem
    else:
        u = [rng.uniform(lay.H_RHOMBUS), rng.uniform(lay.H_A), rng.uniform(lay.H_B)]
        ybs = Point2(*map(float, hexagon_point(hexagon, *u)))
        D = max(hexagon.apothem - float(hex_norm(hexagon.center, ybs)), 0.0)
        L = float(serving_distance_from_uniform(rng.uniform(lay.H_SERVING), cfg.density))
        psi = 2.0 * math.pi * rng.uniform(lay.H_DIRECTION)
        mob = Point2(ybs.x + L * math.cos(psi), ybs.y + L * math.sin(psi))
        d2 = (pts[:, 0] - mob.x) ** 2 + (pts[:, 1] - mob.y) ** 2
        keep = d2 > L * L
        if scenario == "typical":
            keep &= hex_norm(hexagon.center, pts) > hexagon.apothem

    ids = np.flatnonzero(keep)
    return NetworkRealization(
        interferers=PointSet(pts[ids], cfg.density, cfg.disk_radius),
        interferer_ids=ids,
        typical_bs=ybs,
        typical_mobile=mob,
        serving_distance=L,
        edge_distance=float(D),
        cluster=hexagon,
        scenario=scenario,
        background=bg,
    )
