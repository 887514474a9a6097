import math

import numpy as np
import pytest

from mccsim import kernels
from mccsim._rng import TrialStream
from mccsim.channel import GainDraw, ScatteringModel, trial_gains
from mccsim.errors import InvalidParameter, SingularityError
from mccsim.geometry import Hexagon, NetworkRealization, Point2, PointSet, sample_realization
from mccsim.simcore import (SimConfig, check_ring_bounds, empirical_tail, estimate_outage, interference_power,
                            outage_from_interference, run_outage_trial, sample_pg, sample_Zn, sample_Zn_batch,
                            simulate_interference, trial_interference, wilson_interval)

COMBOS = [(s, k) for s in ("cluster-center", "typical", "no-mcc") for k in ("sparse", "rich")]
compiled_only = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernel not built")


def model(kind):
    return ScatteringModel.sparse() if kind == "sparse" else ScatteringModel.rich()


@pytest.mark.parametrize("kw", [dict(density=0), dict(alpha=2.0), dict(theta=0), dict(cluster_size=0),
                                dict(omega=-1), dict(trials=0), dict(scenario="edge"), dict(disk_radius=-1.0),
                                dict(seed=-1)])
def test_config_validation(kw):
    with pytest.raises(InvalidParameter):
        SimConfig(**kw)


def test_default_disk_holds_200_bs():
    cfg = SimConfig()
    assert cfg.density * math.pi * cfg.disk_radius**2 == pytest.approx(200)


def test_wilson_interval_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.stats.proportion")
    for k, n in [(1, 10), (17, 10**6), (500, 1000), (0, 50)]:
        lo, hi = wilson_interval(k, n)
        ref = sm.proportion_confint(k, n, alpha=0.05, method="wilson")
        assert lo == pytest.approx(ref[0], abs=1e-12) and hi == pytest.approx(ref[1], abs=1e-12)


def test_zero_outages_use_rule_of_three():
    est = outage_from_interference(np.zeros(1000), 1.0, 3.0)
    assert est.p_hat == 0 and est.ope_hat is None and est.ci_high == pytest.approx(3e-3)
    assert not est.ope_available


def test_interference_power_by_hand():
    pts = np.array([[10.0, 0.0], [0.0, -20.0]])
    real = NetworkRealization(PointSet(pts, 0.01, 100.0), np.arange(2), Point2(0, 0), Point2(0.0, 0.0),
                              0.0, 1.0, Hexagon(Point2(0, 0), 1.0), "cluster-center")
    gains = GainDraw(7.0, np.array([0.5, 0.25]), np.array([3.0, 2.0]), np.array([6.0, 8.0]))
    cfg = SimConfig(omega=2.0)
    expect = 2.0 * 3.0**4 / 6.0 * 0.5 / 10.0**4 + 2.0 * 2.0**4 / 8.0 * 0.25 / 20.0**4
    assert interference_power(real, gains, cfg) == pytest.approx(expect, rel=1e-14)
    real.interferers = PointSet(np.array([[0.0, 0.0], [1.0, 1.0]]), 0.01, 100.0)
    with pytest.raises(SingularityError):
        interference_power(real, gains, cfg)


@pytest.mark.parametrize("scenario,kind", COMBOS)
def test_numpy_batch_matches_reference_path(scenario, kind):
    cfg = SimConfig(cluster_size=3.0, scenario=scenario, scattering=model(kind), trials=40)
    ref = np.array([trial_interference(cfg, t) for t in range(40)])
    batch = kernels.interference_batch(cfg, 0, 40, backend="python")
    # same draws, slightly different operation order: agreement to a few ulps
    assert np.allclose(ref, batch, rtol=1e-13, atol=0)
    assert np.array_equal(ref > 1 / 3, batch > 1 / 3)


@compiled_only
@pytest.mark.parametrize("scenario,kind", COMBOS)
def test_compiled_matches_numpy(scenario, kind):
    cfg = SimConfig(cluster_size=2.0, scenario=scenario, scattering=model(kind))
    a = kernels.interference_batch(cfg, 100, 3000, backend="python")
    b = kernels.interference_batch(cfg, 100, 3000, backend="compiled")
    assert np.allclose(a, b, rtol=1e-13, atol=0)
    assert np.array_equal(a > 1 / 3, b > 1 / 3)


def test_batch_offsets_are_consistent():
    cfg = SimConfig(cluster_size=2.0, scenario="typical")
    whole = simulate_interference(cfg, count=300)
    assert np.array_equal(whole[120:], simulate_interference(cfg, start=120, count=180))


@compiled_only
def test_thread_count_does_not_change_results():
    cfg = SimConfig(cluster_size=2.0, trials=5000)
    a = simulate_interference(cfg, threads=1)
    b = simulate_interference(cfg, threads=3)
    assert np.array_equal(a, b)


def test_estimate_is_deterministic():
    cfg = SimConfig(cluster_size=2.0, trials=5000)
    assert estimate_outage(cfg) == estimate_outage(cfg)
    assert estimate_outage(cfg) != estimate_outage(cfg.with_(seed=cfg.seed + 1))


def test_run_outage_trial_matches_batch():
    cfg = SimConfig(cluster_size=1.0, scenario="no-mcc", trials=200)
    batch = simulate_interference(cfg) > cfg.omega / cfg.theta
    single = [run_outage_trial(cfg, TrialStream.for_trial(cfg.seed, t)) for t in range(200)]
    assert np.array_equal(batch, single)


@pytest.mark.parametrize("scenario", ["cluster-center", "typical"])
def test_omega_invariance(scenario):
    base = SimConfig(cluster_size=2.0, scenario=scenario, trials=3000)
    flags = [simulate_interference(base.with_(omega=w)) > w / base.theta for w in (0.1, 1.0, 100.0)]
    assert np.array_equal(flags[0], flags[1]) and np.array_equal(flags[1], flags[2])


def test_cluster_center_interference_decreases_pathwise():
    ells = (1.0, 2.0, 4.0)
    I = [simulate_interference(SimConfig(cluster_size=e, trials=3000)) for e in ells]
    assert np.all(I[1] <= I[0]) and np.all(I[2] <= I[1])


@pytest.mark.parametrize("kind,ell", [("sparse", 2.0), ("rich", 4.0), ("sparse", 0.5)])
def test_ring_bounds_hold_per_realization(kind, ell):
    report = check_ring_bounds(SimConfig(cluster_size=ell, scattering=model(kind)), 300)
    assert report.ok, report


def test_ring_bounds_reject_bad_epsilon():
    with pytest.raises(InvalidParameter):
        check_ring_bounds(SimConfig(), 1, epsilon=0)


def test_sparse_pg_mean():
    cfg = SimConfig()
    pg = sample_pg(cfg, 10**6, np.random.default_rng(1))
    # E[L^4] E[G] E[1/W] with E[L^4] = 2 / (pi lambda)^2
    expect = 2 / (math.pi * 0.01) ** 2 * 0.5 * math.log(10 / 6) / 4
    assert abs(pg.mean() - expect) < 5 * pg.std() / math.sqrt(pg.size)


def test_zn_wald_identity():
    for kind in ("sparse", "rich"):
        cfg = SimConfig(cluster_size=3.0, scattering=model(kind))
        rng = np.random.default_rng(7)
        z = sample_Zn_batch(cfg, 200000, rng)
        pg = sample_pg(cfg, 10**6, rng)
        se = math.sqrt(z.var() / z.size + (3.0 * pg.std()) ** 2 / pg.size)
        assert abs(z.mean() - 3.0 * pg.mean()) < 5 * se
    assert sample_Zn(cfg, np.random.default_rng(0)) >= 0


def test_empirical_tail():
    tc = empirical_tail([1, 2, 3, 4], [0.5, 2, 4])
    assert np.array_equal(tc.tail_probs, [1.0, 0.5, 0.0])
    with pytest.raises(InvalidParameter):
        empirical_tail([1.0], [2, 1])
    with pytest.raises(InvalidParameter):
        empirical_tail([], [1])


def test_reference_gains_use_interferer_ids():
    cfg = SimConfig(cluster_size=4.0)
    stream = TrialStream.for_trial(cfg.seed, 3)
    big = sample_realization(cfg.with_(cluster_size=1.0), None, stream)
    small = sample_realization(cfg, None, stream)
    gb = trial_gains(cfg.scattering, big.interferer_ids, cfg.density, stream)
    gs = trial_gains(cfg.scattering, small.interferer_ids, cfg.density, stream)
    pos = np.searchsorted(big.interferer_ids, small.interferer_ids)
    assert np.array_equal(gb.side_lobes[pos], gs.side_lobes)
