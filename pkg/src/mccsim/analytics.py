"""Closed-form laws, tail asymptotes and OPE bound curves.

All logarithms are natural.  Functions named ``*_asymptote`` or documented
as asymptotic are leading-order expressions for large arguments; they are
not finite-sample laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InvalidParameter, NumericalFailure

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class ModelParams:
    density: float = 1e-2
    alpha: float = 4.0
    theta: float = 3.0
    omega: float = 1.0
    delta: float = 6.0
    delta_prime: float = 10.0
    gamma: float = 1.0
    nu: int = 3
    pr_n_equals_nu: float = 1.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise InvalidParameter("path-loss exponent must exceed 2")
        if not 0 < self.delta <= self.delta_prime:
            raise InvalidParameter("need 0 < delta <= delta_prime")
        if self.nu < 2:
            raise InvalidParameter("minimum diversity order must be at least 2")
        if not 0 < self.pr_n_equals_nu <= 1:
            raise InvalidParameter("Pr(N = nu) must lie in (0, 1]")
        if min(self.density, self.theta, self.omega, self.gamma) <= 0:
            raise InvalidParameter("density, theta, omega and gamma must be positive")

    @classmethod
    def from_config(cls, cfg) -> "ModelParams":
        sc = cfg.scattering
        kw = dict(density=cfg.density, alpha=cfg.alpha, theta=cfg.theta, omega=cfg.omega)
        if sc.kind == "sparse":
            kw.update(delta=sc.delta, delta_prime=sc.delta_prime, gamma=sc.gamma)
        else:
            kw.update(nu=sc.nu, pr_n_equals_nu=sc.pr_nu)
        return cls(**kw)


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    regime: str

    @property
    def ordered(self) -> bool:
        return self.lower <= self.upper


# -- distribution laws --------------------------------------------------------

def serving_distance_ccdf(x, density: float):
    """``Pr(L > x) = exp(-pi * density * x**2)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameter("distance must be non-negative")
    out = np.exp(-math.pi * density * x * x)
    return float(out) if out.ndim == 0 else out


def edge_distance_cdf(x, apothem: float):
    """``Pr(D <= x) = 1 - (1 - x/rho)**2`` for a point uniform in the hexagon."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > apothem)):
        raise InvalidParameter("edge distance must lie in [0, apothem]")
    out = 1.0 - (1.0 - x / apothem) ** 2
    return float(out) if out.ndim == 0 else out


# -- OPE constants and bounds -------------------------------------------------

def c1(p: ModelParams) -> float:
    return math.pi / (2 * SQRT3) * (p.delta / (p.theta * p.gamma)) ** (2 / p.alpha)


def c2(p: ModelParams) -> float:
    a = p.alpha
    num = math.pi * p.density ** (1 - a / 4) * p.delta ** (2 / a)
    den = p.omega ** ((4 - a) / (2 * a)) * math.sqrt(p.theta) * (2 * SQRT3) ** (a / 4) * p.gamma ** (2 / a)
    return num / den


def ope_bounds_cc_sparse(ell: float, p: ModelParams) -> BoundPair:
    """Asymptotic OPE sandwich for a cluster-center mobile, sparse scattering."""
    if ell <= 0:
        raise InvalidParameter("cluster size must be positive")
    upper = 4 * c1(p) / 3 * ell
    if p.alpha > 4:
        return BoundPair(c1(p) * ell, upper, "cluster-center sparse, alpha > 4")
    return BoundPair(c2(p) * ell ** (p.alpha / 4), upper, "cluster-center sparse, 2 < alpha <= 4")


def ope_bounds_typical(ell: float, alpha: float) -> BoundPair:
    """Asymptotic OPE sandwich for the typical mobile (either scattering)."""
    if ell < 1:
        raise InvalidParameter("bounds are stated for ell >= 1")
    if not alpha > 2:
        raise InvalidParameter("path-loss exponent must exceed 2")
    lg = math.log(ell)
    return BoundPair(0.5 * (1 - 2 / alpha) * lg, 0.5 * lg, "typical mobile")


def ope_bounds_cc_rich(ell: float, alpha: float, nu: int) -> BoundPair:
    if ell < 1:
        raise InvalidParameter("bounds are stated for ell >= 1")
    if not alpha > 2 or nu < 2:
        raise InvalidParameter("need alpha > 2 and nu >= 2")
    lg = math.log(ell)
    return BoundPair((alpha * nu / 2 - 1) * lg, alpha * nu / 2 * lg, "cluster-center rich")


def ope_bounds(ell: float, scenario: str, scattering: str, p: ModelParams) -> BoundPair | None:
    """Dispatch to the bound pair that applies; ``None`` for the no-MCC baseline."""
    if scenario == "cluster-center":
        if scattering == "sparse":
            return ope_bounds_cc_sparse(ell, p)
        return ope_bounds_cc_rich(ell, p.alpha, p.nu)
    if scenario == "typical":
        return ope_bounds_typical(ell, p.alpha)
    return None


def throughput_scaling(ell: float, alpha: float) -> float:
    """Leading-order cluster-center throughput ``(alpha/2) ln ell`` in nats."""
    if ell < 1:
        raise InvalidParameter("stated for ell >= 1")
    return alpha / 2 * math.log(ell)


# -- P*G tails ----------------------------------------------------------------

def beta_pdf(t, delta: float, delta_prime: float, gamma: float):
    """Density of ``W / G`` for ``W ~ U[delta, delta']`` and ``G ~ U[0, gamma]``.

    Zero below ``delta/gamma``; ``(gamma^2 t^2 - delta^2) / (2 gamma t^2 (delta' - delta))``
    on ``[delta/gamma, delta'/gamma]``; ``(delta + delta') / (2 gamma t^2)`` beyond.
    """
    t = np.asarray(t, dtype=float)
    lo, hi = delta / gamma, delta_prime / gamma
    out = np.where(t >= hi, (delta + delta_prime) / (2 * gamma * t * t), 0.0)
    if delta_prime > delta:
        mid = (t >= lo) & (t < hi)
        out = np.where(mid, (gamma**2 * t * t - delta**2) / (2 * gamma * t * t * (delta_prime - delta)), out)
    return out


def _quad(f, a, b, what):
    val, err, info = integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-10, limit=500, full_output=1)[:3]
    if err > 1e-10:
        raise NumericalFailure(f"{what}: quadrature error {err:.2e} exceeds 1e-10")
    return val


def tail_pg_sparse_quadrature(x: float, p: ModelParams) -> float:
    """``Pr(P*G > x)`` for sparse scattering with uniform lobes, by quadrature.

    Integrates ``exp(-pi lambda (tau x / omega)^(2/alpha)) f_beta(tau)`` over
    the support of ``beta = W/G``.  Beyond ``delta'/gamma`` the density is
    ``c / tau^2`` and the substitution ``s = 1/tau`` maps the infinite range
    onto ``(0, gamma/delta']``.
    """
    if not x > 0:
        raise InvalidParameter("threshold must be positive")
    k = math.pi * p.density * (x / p.omega) ** (2 / p.alpha)
    e = 2 / p.alpha
    lo, hi = p.delta / p.gamma, p.delta_prime / p.gamma
    c = (p.delta + p.delta_prime) / (2 * p.gamma)

    def far(s):
        return 0.0 if s <= 0 else c * math.exp(-k * s ** (-e))

    total = _quad(far, 0.0, 1.0 / hi, "sparse tail (far)")
    if hi > lo:
        total += _quad(lambda t: math.exp(-k * t**e) * float(beta_pdf(t, p.delta, p.delta_prime, p.gamma)),
                       lo, hi, "sparse tail (near)")
    return min(1.0, total)


def pg_sparse_log_tail_rate(p: ModelParams) -> float:
    """Rate ``a`` in ``-ln Pr(P*G > x) ~ a x^(2/alpha)``."""
    return math.pi * p.density * (p.delta / (p.gamma * p.omega)) ** (2 / p.alpha)


def tail_pg_rich(x, p: ModelParams):
    """Leading-order (large ``x``) rich-scattering tail ``C x^(-nu)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise InvalidParameter("threshold must be positive")
    out = rich_tail_coefficient(p) * x ** (-p.nu)
    return float(out) if out.ndim == 0 else out


def rich_tail_coefficient(p: ModelParams) -> float:
    a, nu = p.alpha, p.nu
    return (p.omega**nu * special.gamma(a * nu / 2 + 1) * p.pr_n_equals_nu
            / (math.pi * p.density) ** (a * nu / 2))


def tail_pg_rich_exact(x: float, density: float, alpha: float, omega: float, diversity_pmf: dict) -> float:
    """Exact ``Pr(P*G > x) = E[(1 + x L^-alpha / omega)^-N]`` for rich scattering.

    With ``s = pi lambda L^2 ~ Exp(1)`` the expectation over ``L`` is a
    one-dimensional integral, evaluated per diversity order.
    """
    if not x > 0:
        raise InvalidParameter("threshold must be positive")
    kx = x * (math.pi * density) ** (alpha / 2) / omega
    total = 0.0
    for n, pn in diversity_pmf.items():
        if pn <= 0:
            continue

        def f(s, n=n):
            # (1 + kx s^(-alpha/2))^-n, written to avoid overflow at small s
            r = s ** (alpha / 2)
            return math.exp(-s) * (r / (r + kx)) ** n

        total += pn * _quad(f, 0.0, math.inf, "rich tail")
    return total


# -- compound Poisson Z_n -------------------------------------------------------

@dataclass(frozen=True)
class ZnAsymptote:
    value: float
    kind: str  # "exponent" (-ln tail) or "tail" (probability)
    regime: str


def zn_tail_asymptote(x: float, ell: float, p: ModelParams, scattering: str) -> ZnAsymptote:
    """Leading-order behaviour of ``Pr(Z_n > ell^(alpha/2) x)``.

    Sparse: the exponent ``-ln Pr``; an asymptotic equivalence for
    ``alpha > 4`` and a lower bound for ``2 < alpha <= 4``.  Rich: the tail
    probability itself.
    """
    if not p.alpha > 2:
        raise InvalidParameter("path-loss exponent must exceed 2")
    if not (x > 0 and ell > 0):
        raise InvalidParameter("x and ell must be positive")
    a = p.alpha
    if scattering == "sparse":
        rate = pg_sparse_log_tail_rate(p)
        if a > 4:
            return ZnAsymptote(rate * ell * x ** (2 / a), "exponent", "sparse, alpha > 4 (equivalence)")
        return ZnAsymptote(rate * ell ** (a / 4) * math.sqrt(x), "exponent", "sparse, 2 < alpha <= 4 (lower bound)")
    if scattering == "rich":
        tail = rich_tail_coefficient(p) * x ** (-p.nu) * ell ** (1 - a * p.nu / 2)
        return ZnAsymptote(tail, "tail", "rich")
    raise InvalidParameter(f"unknown scattering {scattering!r}")
