"""Experiment orchestration: outage sweeps, overlays, capacity and tail checks.

Tables persist as CSV whose first line is ``# `` followed by a JSON
metadata object; the metadata carries everything needed to re-run any
row bit-exactly.  A JSON form and a whitespace-separated gnuplot data
file are also available.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__, kernels
from .analytics import (ModelParams, ope_bounds, serving_distance_ccdf, edge_distance_cdf,
                        tail_pg_sparse_quadrature, zn_tail_asymptote)
from .channel import ScatteringModel, sample_rich_gains, sample_serving_distance, zf_gain_oracle
from .errors import CalibrationUnavailable, InvalidParameter, NumericalFailure, SingularityError
from .geometry import Hexagon, edge_distance, sample_in_hexagon
from .simcore import (OutageEstimate, SimConfig, outage_from_interference, sample_pg, sample_Zn_batch,
                      simulate_interference)

THETA_MIN = 1e-3
THETA_MAX = 1e3
BISECTION_STEPS = 40
DEFAULT_SWEEP = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


# -- configuration -------------------------------------------------------------

def scattering_for(base: SimConfig, kind: str) -> ScatteringModel:
    """The base model if it has the requested kind, else that kind's defaults."""
    if base.scattering.kind == kind:
        return base.scattering
    if kind == "sparse":
        return ScatteringModel.sparse()
    if kind == "rich":
        return ScatteringModel.rich()
    raise InvalidParameter(f"unknown scattering {kind!r}")


def config_to_dict(cfg: SimConfig) -> dict:
    sc = cfg.scattering
    d = dict(density=cfg.density, cluster_size=cfg.cluster_size, alpha=cfg.alpha, theta=cfg.theta,
             omega=cfg.omega, scenario=cfg.scenario, trials=cfg.trials, seed=cfg.seed,
             disk_radius=cfg.disk_radius, scattering=sc.kind)
    if sc.kind == "sparse":
        d.update(delta=sc.delta, delta_prime=sc.delta_prime, gamma=sc.gamma)
    else:
        d["diversity_pmf"] = {str(k): v for k, v in sorted(sc.diversity_pmf.items())}
    return d


def config_from_dict(d: dict) -> SimConfig:
    d = dict(d)
    kind = d.pop("scattering", "sparse")
    if kind == "sparse":
        model = ScatteringModel.sparse(d.pop("delta", 6.0), d.pop("delta_prime", 10.0), d.pop("gamma", 1.0))
    else:
        pmf = d.pop("diversity_pmf", {3: 1.0})
        model = ScatteringModel.rich({int(k): float(v) for k, v in pmf.items()})
    return SimConfig(scattering=model, **d)


@dataclass(frozen=True)
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    sweep: tuple = DEFAULT_SWEEP
    scenarios: tuple = ("cluster-center", "typical")
    scatterings: tuple = ("sparse", "rich")
    outage_cap_epsilon: float = 0.05
    output_path: str | None = None

    def __post_init__(self):
        sweep = tuple(float(x) for x in self.sweep)
        if not sweep:
            raise InvalidParameter("sweep must not be empty")
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise InvalidParameter("sweep must be strictly increasing")
        if any(x <= 0 for x in sweep):
            raise InvalidParameter("cluster sizes must be positive")
        object.__setattr__(self, "sweep", sweep)
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "scatterings", tuple(self.scatterings))
        for s in self.scenarios:
            if s not in ("cluster-center", "typical", "no-mcc"):
                raise InvalidParameter(f"unknown scenario {s!r}")
        for s in self.scatterings:
            if s not in ("sparse", "rich"):
                raise InvalidParameter(f"unknown scattering {s!r}")
        if not 0 < self.outage_cap_epsilon < 1:
            raise InvalidParameter("epsilon must lie in (0, 1)")

    def row_config(self, ell: float | None, scenario: str, scattering: str) -> SimConfig:
        cfg = self.base.with_(scenario=scenario, scattering=scattering_for(self.base, scattering))
        return cfg if ell is None else cfg.with_(cluster_size=ell)


# -- result tables -------------------------------------------------------------

@dataclass
class ResultRow:
    ell: float | None  # None for the no-MCC baseline, which has no cluster
    scenario: str
    scattering: str
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    outage_count: int
    ope_hat: float | None
    bound_lower: float | None
    bound_upper: float | None
    error: str | None = None


@dataclass
class CapacityRow:
    ell: float | None
    scenario: str
    scattering: str
    epsilon: float
    capacity: float
    theta_star: float
    theta_low: float
    theta_high: float
    trials: int
    error: str | None = None


_INT_FIELDS = {"trials", "outage_count"}
_STR_FIELDS = {"scenario", "scattering", "error"}


def _encode(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _decode(name: str, s: str):
    if s == "":
        return None
    if name in _STR_FIELDS:
        return s
    if name in _INT_FIELDS:
        return int(s)
    return float(s)


@dataclass
class ResultTable:
    rows: list
    metadata: dict
    row_type: type = ResultRow

    @property
    def columns(self) -> list[str]:
        return [f.name for f in fields(self.row_type)]

    @property
    def partial(self) -> bool:
        """True when at least one row failed and carries an error message."""
        return any(r.error for r in self.rows)

    def select(self, scenario: str, scattering: str) -> list:
        rows = [r for r in self.rows if r.scenario == scenario and r.scattering == scattering]
        return sorted(rows, key=lambda r: -math.inf if r.ell is None else r.ell)

    def baseline(self, scattering: str):
        rows = self.select("no-mcc", scattering)
        return rows[0] if rows else None

    def __eq__(self, other):
        return (isinstance(other, ResultTable) and self.row_type is other.row_type
                and self.metadata == other.metadata and self.rows == other.rows)

    # CSV with a JSON metadata header line
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps({"row_type": self.row_type.__name__, **self.metadata}, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_encode(getattr(r, c)) for c in self.columns])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "ResultTable":
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "ResultTable":
        first, _, body = text.partition("\n")
        if not first.startswith("# "):
            raise InvalidParameter("missing metadata header line")
        meta = json.loads(first[2:])
        row_type = _ROW_TYPES[meta.pop("row_type", "ResultRow")]
        reader = csv.reader(io.StringIO(body))
        header = next(reader)
        rows = [row_type(**{h: _decode(h, v) for h, v in zip(header, rec)}) for rec in reader if rec]
        return cls(rows, meta, row_type)

    def to_json(self, path=None) -> str:
        doc = {"metadata": self.metadata, "row_type": self.row_type.__name__,
               "rows": [asdict(r) for r in self.rows]}
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        row_type = _ROW_TYPES[doc["row_type"]]
        return cls([row_type(**r) for r in doc["rows"]], doc["metadata"], row_type)

    def to_gnuplot(self, path=None, value: str | None = None) -> str:
        """One indexed block per (scenario, scattering) series, blank-line separated."""
        value = value or ("p_hat" if self.row_type is ResultRow else "capacity")
        out = []
        series = sorted({(r.scenario, r.scattering) for r in self.rows})
        for scenario, scattering in series:
            out.append(f"# {scenario} {scattering}: ell {value}"
                       + (" bound_lower bound_upper" if self.row_type is ResultRow else ""))
            rows = self.select(scenario, scattering)
            for r in rows:
                if r.ell is None:
                    # horizontal baseline: span the other series' range
                    ells = [x.ell for x in self.rows if x.ell is not None] or [0.0]
                    for e in (min(ells), max(ells)):
                        out.append(f"{e!r} {_gp(getattr(r, value))}")
                else:
                    extra = (f" {_gp(r.bound_lower)} {_gp(r.bound_upper)}"
                             if self.row_type is ResultRow else "")
                    out.append(f"{r.ell!r} {_gp(getattr(r, value))}{extra}")
            out.append("\n")
        text = "\n".join(out)
        if path is not None:
            Path(path).write_text(text)
        return text


def _gp(v) -> str:
    return "NaN" if v is None else repr(float(v))


_ROW_TYPES = {"ResultRow": ResultRow, "CapacityRow": CapacityRow}


def _metadata(spec: ExperimentSpec) -> dict:
    return {"base": config_to_dict(spec.base), "sweep": list(spec.sweep),
            "scenarios": list(spec.scenarios), "scatterings": list(spec.scatterings),
            "epsilon": spec.outage_cap_epsilon, "seed": spec.base.seed, "trials": spec.base.trials,
            "version": __version__, "backend": kernels.BACKEND}


def spec_from_metadata(meta: dict) -> ExperimentSpec:
    return ExperimentSpec(base=config_from_dict(meta["base"]), sweep=tuple(meta["sweep"]),
                          scenarios=tuple(meta["scenarios"]), scatterings=tuple(meta["scatterings"]),
                          outage_cap_epsilon=meta["epsilon"])


# -- outage probability sweep --------------------------------------------------

def _row_jobs(spec: ExperimentSpec):
    for scattering in spec.scatterings:
        for scenario in spec.scenarios:
            if scenario == "no-mcc":
                continue
            for ell in spec.sweep:
                yield ell, scenario, scattering
        yield None, "no-mcc", scattering


def outage_row(spec: ExperimentSpec, ell, scenario: str, scattering: str, threads: int = 0,
               interference: np.ndarray | None = None) -> ResultRow:
    cfg = spec.row_config(ell, scenario, scattering)
    try:
        if interference is None:
            interference = simulate_interference(cfg, threads)
        est = outage_from_interference(interference, cfg.omega, cfg.theta)
    except (InvalidParameter, NumericalFailure, SingularityError) as exc:
        nan = math.nan
        return ResultRow(ell, scenario, scattering, nan, nan, nan, cfg.trials, 0, None, None, None,
                         f"{type(exc).__name__}: {exc}")
    lo = hi = None
    if ell is not None:
        try:
            bp = ope_bounds(ell, scenario, scattering, ModelParams.from_config(cfg))
        except InvalidParameter:
            bp = None
        if bp is not None:
            lo, hi = bp.lower, bp.upper
    return ResultRow(ell, scenario, scattering, est.p_hat, est.ci_low, est.ci_high, est.trials,
                     est.outage_count, est.ope_hat, lo, hi)


def run_fig3(spec: ExperimentSpec, threads: int = 0, progress=None, cache: dict | None = None) -> ResultTable:
    """Outage estimates over the sweep for every scenario/scattering pair.

    The no-MCC baseline is evaluated once per scattering (it does not depend
    on the cluster size).  Rows that raise are kept with ``error`` set and
    the table reports itself as ``partial``.  ``cache``, if given, maps
    ``(ell, scenario, scattering)`` to interference vectors and is filled
    as rows are computed, so later experiments can reuse them.
    """
    rows = []
    for job in _row_jobs(spec):
        interference = None
        if cache is not None and job in cache:
            interference = cache[job]
        elif cache is not None:
            try:
                interference = cache[job] = simulate_interference(spec.row_config(*job), threads)
            except (InvalidParameter, NumericalFailure, SingularityError):
                interference = None
        row = outage_row(spec, *job, threads=threads, interference=interference)
        rows.append(row)
        if progress is not None:
            progress(row)
    return ResultTable(rows, _metadata(spec))


def reproduce_row(table: ResultTable, index: int, threads: int = 0):
    """Recompute row ``index`` from the table metadata alone."""
    spec = spec_from_metadata(table.metadata)
    r = table.rows[index]
    if table.row_type is ResultRow:
        return outage_row(spec, r.ell, r.scenario, r.scattering, threads)
    return capacity_row(spec, r.ell, r.scenario, r.scattering, r.epsilon, threads)


@dataclass(frozen=True)
class CalibratedCurve:
    ells: np.ndarray
    values: np.ndarray
    b: float
    anchor_ell: float
    bound_curve: str


def calibrate_overlay(table: ResultTable, bound_curve: str, scenario: str = "cluster-center",
                      scattering: str = "sparse") -> CalibratedCurve:
    """Scale ``exp(-phi(ell))`` to the simulation: ``b * exp(-phi(ell))``.

    ``phi`` is the lower or upper OPE bound stored in the table and ``b`` is
    fixed so the curve equals ``p_hat`` at the largest ``ell`` with
    ``p_hat > 0``.
    """
    if bound_curve not in ("lower", "upper"):
        raise InvalidParameter("bound_curve must be 'lower' or 'upper'")
    rows = [r for r in table.select(scenario, scattering) if r.ell is not None]
    attr = "bound_" + bound_curve
    if any(getattr(r, attr) is None for r in rows):
        raise CalibrationUnavailable(f"no {bound_curve} bound for {scenario}/{scattering}")
    usable = [r for r in rows if r.p_hat is not None and r.p_hat > 0 and not r.error]
    if not usable:
        raise CalibrationUnavailable(f"no row with positive p_hat for {scenario}/{scattering}")
    anchor = usable[-1]
    b = anchor.p_hat * math.exp(getattr(anchor, attr))
    ells = np.array([r.ell for r in rows])
    phi = np.array([getattr(r, attr) for r in rows])
    return CalibratedCurve(ells, b * np.exp(-phi), b, anchor.ell, bound_curve)


# -- outage capacity ------------------------------------------------------------

@dataclass(frozen=True)
class CapacityResult:
    capacity: float  # ln(1 + theta*), nats
    theta_star: float
    bracket: tuple[float, float]
    converged: bool


def capacity_from_interference(interference: np.ndarray, omega: float, epsilon: float,
                               theta_min: float = THETA_MIN, theta_max: float = THETA_MAX,
                               steps: int = BISECTION_STEPS, rtol: float = 1e-6) -> CapacityResult:
    """Largest ``theta`` with empirical ``Pr(I > omega/theta) <= epsilon``, by bisection.

    All evaluations share the same interference samples, so the estimate is
    monotone in ``theta`` and the bisection is exact on the sample.
    Bisection runs on ``ln theta``.
    """
    if not 0 < epsilon <= 1:
        raise InvalidParameter("epsilon must lie in (0, 1]")
    if not 0 < theta_min < theta_max:
        raise InvalidParameter("need 0 < theta_min < theta_max")
    interference = np.sort(np.asarray(interference, dtype=float))
    n = interference.size
    if n == 0:
        raise InvalidParameter("no interference samples")

    def p_hat(theta):
        return (n - np.searchsorted(interference, omega / theta, side="right")) / n

    if p_hat(theta_min) > epsilon:
        return CapacityResult(0.0, 0.0, (0.0, theta_min), True)
    if p_hat(theta_max) <= epsilon:
        return CapacityResult(math.log1p(theta_max), theta_max, (theta_max, theta_max), True)
    lo, hi = math.log(theta_min), math.log(theta_max)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if p_hat(math.exp(mid)) <= epsilon:
            lo = mid
        else:
            hi = mid
    t_lo, t_hi = math.exp(lo), math.exp(hi)
    converged = t_hi - t_lo <= rtol * t_lo
    if not converged:
        warnings.warn(f"bisection budget exhausted; theta* in [{t_lo:.6g}, {t_hi:.6g}]", RuntimeWarning)
    return CapacityResult(math.log1p(t_lo), t_lo, (t_lo, t_hi), converged)


def outage_capacity(cfg: SimConfig, ell: float, epsilon: float, threads: int = 0,
                    interference: np.ndarray | None = None, **kw) -> CapacityResult:
    """Outage capacity ``ln(1 + theta*)`` at cluster size ``ell`` and target ``epsilon``.

    ``cfg.theta`` is ignored.  Pass ``interference`` to reuse samples already
    simulated for the same configuration.
    """
    if not 0 < epsilon <= 1:
        raise InvalidParameter("epsilon must lie in (0, 1]")
    cfg = cfg.with_(cluster_size=ell)
    if interference is None:
        interference = simulate_interference(cfg, threads)
    return capacity_from_interference(interference, cfg.omega, epsilon, **kw)


def capacity_row(spec: ExperimentSpec, ell, scenario: str, scattering: str, epsilon: float,
                 threads: int = 0, interference: np.ndarray | None = None) -> CapacityRow:
    cfg = spec.row_config(ell, scenario, scattering)
    try:
        res = outage_capacity(cfg, cfg.cluster_size, epsilon, threads, interference)
    except (InvalidParameter, NumericalFailure, SingularityError) as exc:
        nan = math.nan
        return CapacityRow(ell, scenario, scattering, epsilon, nan, nan, nan, nan, cfg.trials,
                           f"{type(exc).__name__}: {exc}")
    return CapacityRow(ell, scenario, scattering, epsilon, res.capacity, res.theta_star,
                       res.bracket[0], res.bracket[1], cfg.trials)


def run_fig4(spec: ExperimentSpec, threads: int = 0, progress=None, cache: dict | None = None) -> ResultTable:
    """Outage capacity at ``spec.outage_cap_epsilon`` over the sweep (plus no-MCC)."""
    rows = []
    for job in _row_jobs(spec):
        interference = cache.get(job) if cache is not None else None
        row = capacity_row(spec, *job, spec.outage_cap_epsilon, threads, interference)
        rows.append(row)
        if progress is not None:
            progress(row)
    return ResultTable(rows, _metadata(spec), CapacityRow)


# -- bound curves ------------------------------------------------------------------

def bound_table(spec: ExperimentSpec) -> list[dict]:
    """Analytic OPE bound pairs over the sweep for every scenario/scattering pair."""
    out = []
    for scattering in spec.scatterings:
        for scenario in spec.scenarios:
            for ell in spec.sweep:
                cfg = spec.row_config(ell, scenario, scattering)
                try:
                    bp = ope_bounds(ell, scenario, scattering, ModelParams.from_config(cfg))
                except InvalidParameter:
                    bp = None
                if bp is None:
                    continue
                out.append(dict(ell=ell, scenario=scenario, scattering=scattering,
                                ope_lower=bp.lower, ope_upper=bp.upper, regime=bp.regime))
    return out


# -- tail validation -----------------------------------------------------------------

@dataclass(frozen=True)
class TailCheck:
    name: str
    passed: bool
    statistic: float
    threshold: str
    detail: str = ""


@dataclass(frozen=True)
class TailReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> TailCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.statistic:.6g} ({c.threshold}) {c.detail}".rstrip()
                for c in self.checks]


@dataclass(frozen=True)
class TailSizes:
    ks_draws: int = 10**5
    zf_draws: int = 10**5
    pg_draws: int = 10**7
    zn_draws: int = 10**6
    zn_ell: float = 4.0


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def check_serving_distance(cfg: SimConfig, draws: int = 10**5, level: float = 0.01) -> TailCheck:
    x = sample_serving_distance(cfg.density, _rng(cfg.seed, 1), draws)
    res = stats.kstest(x, lambda t: 1.0 - serving_distance_ccdf(np.maximum(t, 0.0), cfg.density))
    return TailCheck("serving_distance_ks", res.pvalue > level, res.pvalue, f"KS p-value > {level}",
                     f"D={res.statistic:.4g}, n={draws}")


def check_edge_distance(cfg: SimConfig, draws: int = 10**5, level: float = 0.01) -> TailCheck:
    hx = Hexagon((0.0, 0.0), cfg.apothem)
    d = edge_distance(hx, sample_in_hexagon(hx, draws, _rng(cfg.seed, 2)))
    res = stats.kstest(d, lambda t: edge_distance_cdf(np.clip(t, 0.0, hx.apothem), hx.apothem))
    return TailCheck("edge_distance_ks", res.pvalue > level, res.pvalue, f"KS p-value > {level}",
                     f"D={res.statistic:.4g}, n={draws}")


def check_zf_oracle(cfg: SimConfig, draws: int = 10**5, level: float = 0.01, q: int = 5, m: int = 3) -> list[TailCheck]:
    """Explicit zero forcing vs the Gamma/Exponential gain model, two-sample KS."""
    w, g = zf_gain_oracle(q, m, _rng(cfg.seed, 3), draws)
    model = ScatteringModel.rich({q - m + 1: 1.0})
    ref = sample_rich_gains(model, draws, cfg.density, _rng(cfg.seed, 4))
    out = []
    for name, a, b in (("zf_main_lobe_ks", w, ref.interferer_main_lobes), ("zf_side_lobe_ks", g, ref.side_lobes)):
        res = stats.ks_2samp(a, b)
        out.append(TailCheck(name, res.pvalue > level, res.pvalue, f"two-sample KS p-value > {level}",
                             f"D={res.statistic:.4g}, n={draws} each, Q={q}, M={m}"))
    return out


def sparse_tail_comparison(cfg: SimConfig, draws: int = 10**7, params: ModelParams | None = None,
                           floor: float = 1e-4, points: int = 40):
    """Empirical sparse ``P*G`` tail vs quadrature on a log grid.

    Returns ``(x, empirical, quadrature)`` restricted to thresholds whose
    empirical tail is at least ``floor``.
    """
    sim = cfg.with_(scattering=scattering_for(cfg, "sparse"))
    params = params or ModelParams.from_config(sim)
    pg = np.sort(sample_pg(sim, draws, _rng(cfg.seed, 5)))
    x_hi = pg[-int(math.ceil(floor * draws))]
    x = np.geomspace(np.quantile(pg, 0.5), x_hi, points)
    emp = (draws - np.searchsorted(pg, x, side="right")) / draws
    keep = emp >= floor
    x, emp = x[keep], emp[keep]
    quad = np.array([tail_pg_sparse_quadrature(float(t), params) for t in x])
    return x, emp, quad


def check_sparse_tail(cfg: SimConfig, draws: int = 10**7, params: ModelParams | None = None,
                      rel_tol: float = 0.05) -> TailCheck:
    x, emp, quad = sparse_tail_comparison(cfg, draws, params)
    rel = np.abs(emp - quad) / quad
    worst = int(np.argmax(rel))
    return TailCheck("pg_sparse_vs_quadrature", bool(rel.max() <= rel_tol), float(rel.max()),
                     f"max relative error <= {rel_tol}",
                     f"{len(x)} thresholds, worst at x={x[worst]:.4g} (tail {emp[worst]:.3g}), n={draws}")


def rich_tail_slope(cfg: SimConfig, draws: int = 10**7, floor: float = 1e-4, points: int = 20):
    """Least-squares slope of ln(tail) on ln(x) over the top decade with tail >= floor."""
    sim = cfg.with_(scattering=scattering_for(cfg, "rich"))
    pg = np.sort(sample_pg(sim, draws, _rng(cfg.seed, 6)))
    x_top = pg[-int(math.ceil(floor * draws))]
    x = np.geomspace(x_top / 10, x_top, points)
    emp = (draws - np.searchsorted(pg, x, side="left")) / draws
    slope = np.polyfit(np.log(x), np.log(emp), 1)[0]
    return float(slope), x, emp


def check_rich_slope(cfg: SimConfig, draws: int = 10**7, tol: float = 0.15) -> TailCheck:
    nu = scattering_for(cfg, "rich").nu
    slope, x, emp = rich_tail_slope(cfg, draws)
    return TailCheck("pg_rich_slope", abs(slope + nu) <= tol, slope, f"-{nu} +/- {tol}",
                     f"x in [{x[0]:.4g}, {x[-1]:.4g}], tail in [{emp[-1]:.3g}, {emp[0]:.3g}], n={draws}")


def check_zn(cfg: SimConfig, scattering: str, draws: int = 10**6, ell: float = 4.0,
             band: tuple[float, float] = (1e-4, 1e-2), factor: float | None = None) -> TailCheck:
    """Compound Poisson ``Z_n`` tail at ``ell^(alpha/2) x`` vs its asymptote.

    Sparse compares exponents (-ln tail) within ``factor`` (default 2);
    rich compares probabilities within ``factor`` (default 10).
    """
    sim = cfg.with_(cluster_size=ell, scattering=scattering_for(cfg, scattering))
    factor = factor or (2.0 if scattering == "sparse" else 10.0)
    p = ModelParams.from_config(sim)
    z = np.sort(sample_Zn_batch(sim, draws, _rng(cfg.seed, 7 if scattering == "sparse" else 8)))
    scale = ell ** (sim.alpha / 2)
    lo_x = z[-int(band[1] * draws)] / scale
    hi_x = z[-int(math.ceil(band[0] * draws))] / scale
    xs = np.geomspace(lo_x, hi_x, 12)
    worst = 1.0
    for x in xs:
        tail = (draws - np.searchsorted(z, scale * x, side="right")) / draws
        a = zn_tail_asymptote(float(x), ell, p, scattering)
        ratio = (-math.log(tail) / a.value) if scattering == "sparse" else tail / a.value
        if abs(math.log(ratio)) > abs(math.log(worst)):
            worst = ratio
    return TailCheck(f"zn_{scattering}_asymptote", abs(math.log(worst)) <= math.log(factor), worst,
                     f"ratio within factor {factor:g}", f"ell={ell:g}, x in [{lo_x:.4g}, {hi_x:.4g}], n={draws}")


def validate_tails(cfg: SimConfig, sizes: TailSizes = TailSizes(),
                   analytic_params: ModelParams | None = None) -> TailReport:
    """Empirical-vs-analytic comparisons for every law the engine relies on.

    ``analytic_params`` overrides the parameters used on the analytic side
    of the sparse tail comparison (a negative control).  The report is a
    deterministic function of ``cfg.seed`` and ``sizes``.
    """
    checks = [check_serving_distance(cfg, sizes.ks_draws),
              check_edge_distance(cfg, sizes.ks_draws),
              *check_zf_oracle(cfg, sizes.zf_draws),
              check_sparse_tail(cfg, sizes.pg_draws, analytic_params),
              check_rich_slope(cfg, sizes.pg_draws),
              check_zn(cfg, "sparse", sizes.zn_draws, sizes.zn_ell),
              check_zn(cfg, "rich", sizes.zn_draws, sizes.zn_ell)]
    return TailReport(tuple(checks))


def estimate_from_row(row: ResultRow) -> OutageEstimate:
    return OutageEstimate(row.p_hat, row.ci_low, row.ci_high, row.trials, row.outage_count, row.ope_hat)
