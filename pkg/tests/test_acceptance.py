"""Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance.

Reference parameters: density 1e-2, alpha 4, theta 3, W ~ U[6, 10],
G ~ U[0, 1], diversity order 3, 10^6 trials per Monte Carlo estimate.
Run alone with ``python3 tests/test_acceptance.py`` or via ``pytest -v``; the
summary lines are repeated at the end of the pytest report.
"""

import random
import sys
import time

import numpy as np
import pytest

from mccsim import kernels
from mccsim.harness import (ExperimentSpec, calibrate_overlay, check_edge_distance, check_rich_slope,
                            check_serving_distance, check_sparse_tail, check_zf_oracle, reproduce_row, run_fig3,
                            run_fig4)
from mccsim.simcore import SimConfig, check_ring_bounds, simulate_interference

TRIALS = 10**6
BASE = SimConfig(trials=TRIALS)
FIG3_SWEEP = (1.0, 2.0, 4.0, 6.0, 8.0)

# interference vectors shared by criteria 8-12, keyed (ell, scenario, scattering)
CACHE: dict = {}
TIMES: dict = {}


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def fig3(sweep, scenarios=("cluster-center", "typical"), scatterings=("sparse", "rich")):
    spec = ExperimentSpec(base=BASE, sweep=sweep, scenarios=scenarios, scatterings=scatterings)
    return run_fig3(spec, cache=CACHE)


# 1-5: laws and tails --------------------------------------------------------------

def test_criterion_01_serving_distance(acceptance_report):
    with Timer() as t:
        c = check_serving_distance(BASE, 10**5)
    ok = c.passed and t.elapsed < 5
    acceptance_report(1, ok, f"serving-distance KS p={c.statistic:.4f} (> 0.01), {t.elapsed:.2f}s (< 5s)")
    assert ok


def test_criterion_02_edge_distance(acceptance_report):
    with Timer() as t:
        c = check_edge_distance(BASE.with_(cluster_size=4.0), 10**5)
    ok = c.passed and t.elapsed < 5
    acceptance_report(2, ok, f"edge-distance KS p={c.statistic:.4f} (> 0.01), {t.elapsed:.2f}s (< 5s)")
    assert ok


def test_criterion_03_zero_forcing_gains(acceptance_report):
    with Timer() as t:
        main, side = check_zf_oracle(BASE, 10**5, q=5, m=3)
    ok = main.passed and side.passed and t.elapsed < 30
    acceptance_report(3, ok, f"ZF(Q=5,M=3) vs model two-sample KS: main p={main.statistic:.4f}, "
                             f"side p={side.statistic:.4f} (> 0.01), {t.elapsed:.1f}s (< 30s)")
    assert ok


def test_criterion_04_sparse_pg_tail(acceptance_report):
    with Timer() as t:
        c = check_sparse_tail(BASE, 10**7)
    ok = c.passed and t.elapsed < 120
    acceptance_report(4, ok, f"sparse P*G tail vs quadrature: max rel err {c.statistic:.4f} (<= 0.05) "
                             f"over thresholds with tail >= 1e-4; {c.detail}; {t.elapsed:.1f}s (< 120s)")
    assert ok


def test_criterion_05_rich_pg_slope(acceptance_report):
    with Timer() as t:
        c = check_rich_slope(BASE, 10**7)
    ok = c.passed and t.elapsed < 120
    acceptance_report(5, ok, f"rich P*G log-log slope {c.statistic:.3f} (target -3 +/- 0.15); {c.detail}; "
                             f"{t.elapsed:.1f}s (< 120s)")
    assert ok


# 6-7: per-realization properties -----------------------------------------------------

def test_criterion_06_ring_sandwich(acceptance_report):
    with Timer() as t:
        reports = [check_ring_bounds(BASE.with_(cluster_size=ell), 10**4 // 2) for ell in (2.0, 6.0)]
    trials = sum(r.trials for r in reports)
    up = sum(r.upper_violations for r in reports)
    lo = sum(r.lower_violations for r in reports)
    ok = up == 0 and lo == 0 and t.elapsed < 60
    acceptance_report(6, ok, f"ring upper/lower bounds on cluster-center interference: {up} upper and "
                             f"{lo} lower violations in {trials} coupled trials (ell 2 and 6), {t.elapsed:.1f}s (< 60s)")
    assert ok


def test_criterion_07_omega_invariance(acceptance_report):
    with Timer() as t:
        same = True
        for scenario in ("cluster-center", "typical", "no-mcc"):
            cfg = BASE.with_(cluster_size=2.0, scenario=scenario, trials=10**4)
            flags = [simulate_interference(cfg.with_(omega=w)) > w / cfg.theta for w in (0.1, 1.0, 100.0)]
            same &= all(np.array_equal(flags[0], f) for f in flags[1:])
    ok = same and t.elapsed < 10
    acceptance_report(7, ok, f"outage indicators identical for omega in {{0.1, 1, 100}} "
                             f"(10^4 trials x 3 scenarios): {same}, {t.elapsed:.1f}s (< 10s)")
    assert ok


# 8-11: sweep-level orderings -------------------------------------------------------

@pytest.fixture(scope="module")
def fig3_table():
    with Timer() as t:
        table = fig3(FIG3_SWEEP)
    TIMES["fig3"] = t.elapsed
    return table


def test_criterion_08_outage_sweep_orderings(acceptance_report, fig3_table):
    cc = fig3_table.select("cluster-center", "sparse")
    p = [r.p_hat for r in cc]
    a = all(b.p_hat < r.p_hat and b.ci_high < r.ci_low for r, b in zip(cc, cc[1:]))

    b_parts = []
    b = True
    for sc in ("sparse", "rich"):
        typ = [r.p_hat for r in fig3_table.select("typical", sc)]
        base = fig3_table.baseline(sc).p_hat
        spread = max(typ) / min(typ)
        vs_base = max(max(base / x, x / base) for x in typ)
        b &= spread < 2 and vs_base < 2
        b_parts.append(f"{sc}: max/min {spread:.2f}, worst ratio to no-MCC {vs_base:.2f} (no-MCC p={base:.4f})")

    rich6 = fig3_table.select("cluster-center", "rich")[FIG3_SWEEP.index(6.0)].p_hat
    sparse6 = cc[FIG3_SWEEP.index(6.0)].p_hat
    c = rich6 >= 10 * sparse6
    elapsed = TIMES["fig3"]
    ok = a and b and c and elapsed < 900
    acceptance_report(8, ok, f"(a) {'pass' if a else 'fail'}: cluster-center sparse p={['%.3g' % x for x in p]} "
                             f"with disjoint adjacent CIs; (b) {'pass' if b else 'fail'}: " + "; ".join(b_parts)
                      + f" (need < 2 and < 2); (c) {'pass' if c else 'fail'}: rich/sparse at ell=6 = "
                        f"{rich6 / sparse6:.3g} (>= 10); {elapsed:.0f}s (< 900s)")
    assert ok


def test_criterion_09_typical_ope_slope(acceptance_report):
    sweep = (2.0, 4.0, 8.0, 16.0)
    with Timer() as t:
        rows = fig3(sweep, ("typical",), ("sparse",)).select("typical", "sparse")
    ope = np.array([r.ope_hat for r in rows])
    slope = float(np.polyfit(np.log(sweep), ope, 1)[0])
    ok = 0.10 <= slope <= 0.65 and t.elapsed < 1200
    acceptance_report(9, ok, f"typical-mobile OPE vs ln(ell) over {{2,4,8,16}}: slope {slope:.3f} "
                             f"(band [0.10, 0.65]), OPE={np.round(ope, 3).tolist()}, {t.elapsed:.0f}s (< 1200s)")
    assert ok


def test_criterion_10_calibrated_lower_bound(acceptance_report):
    sweep = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    with Timer() as t:
        table = fig3(sweep, ("cluster-center",), ("sparse",))
        curve = calibrate_overlay(table, "lower")
        upper = calibrate_overlay(table, "upper")
    p = np.array([r.p_hat for r in table.select("cluster-center", "sparse")])
    ratio = curve.values / p
    ok = bool(np.all((ratio >= 0.2) & (ratio <= 5))) and t.elapsed < 900
    acceptance_report(10, ok, f"b2*exp(-phi_lower) anchored at ell={curve.anchor_ell:g}: curve/p_hat = "
                              f"{np.round(ratio, 3).tolist()} (each in [0.2, 5]); for reference the upper-bound "
                              f"overlay gives {np.round(upper.values / p, 3).tolist()}; {t.elapsed:.0f}s (< 900s)")
    assert ok


def test_criterion_11_capacity_orderings(acceptance_report, fig3_table):
    sweep = (2.0, 4.0, 6.0, 8.0)
    spec = ExperimentSpec(base=BASE, sweep=sweep, outage_cap_epsilon=0.05)
    with Timer() as t:
        table = run_fig4(spec, cache=CACHE)
    cc = [r.capacity for r in table.select("cluster-center", "sparse")]
    typ = [r.capacity for r in table.select("typical", "sparse")]
    base = {sc: table.baseline(sc).capacity for sc in ("sparse", "rich")}
    a = all(y > x for x, y in zip(cc, cc[1:]))
    b = all(ty < c for ty, c in zip(typ, cc))
    c = all(v < 0.05 for v in base.values())
    ok = a and b and c and t.elapsed < 1800
    acceptance_report(11, ok, f"capacity at eps=0.05 (nats): (a) {'pass' if a else 'fail'} cluster-center "
                              f"{np.round(cc, 3).tolist()} increasing; (b) {'pass' if b else 'fail'} typical "
                              f"{np.round(typ, 3).tolist()} below; (c) {'pass' if c else 'fail'} no-MCC sparse "
                              f"{base['sparse']:.3f}, rich {base['rich']:.3f} (< 0.05); {t.elapsed:.0f}s (< 1800s)")
    assert ok


# 12: determinism ----------------------------------------------------------------------

def test_criterion_12_determinism(acceptance_report, fig3_table):
    checks = {}
    checks["laws"] = (check_serving_distance(BASE) == check_serving_distance(BASE)
                      and check_edge_distance(BASE) == check_edge_distance(BASE)
                      and check_zf_oracle(BASE, 20000) == check_zf_oracle(BASE, 20000))
    checks["tails"] = check_sparse_tail(BASE, 10**6) == check_sparse_tail(BASE, 10**6)
    checks["ring"] = check_ring_bounds(BASE.with_(cluster_size=2.0), 500) == \
        check_ring_bounds(BASE.with_(cluster_size=2.0), 500)
    # re-simulate prefixes of cached 10^6-trial rows, serial and with several threads
    same = True
    n = 10**5
    for key in [(4.0, "cluster-center", "sparse"), (2.0, "typical", "rich"), (None, "no-mcc", "sparse")]:
        ell, scenario, scattering = key
        cfg = ExperimentSpec(base=BASE).row_config(ell, scenario, scattering)
        full = CACHE[key]
        for threads in (1, 4):
            same &= np.array_equal(simulate_interference(cfg, threads, 0, n), full[:n])
        same &= np.array_equal(simulate_interference(cfg, 2, TRIALS - n, n), full[-n:])
    checks["monte carlo (serial/parallel)"] = bool(same)
    # full 10^6-trial rows recomputed from table metadata alone
    picks = random.Random(12).sample(range(len(fig3_table.rows)), 2)
    checks["fig3 rows from metadata"] = all(reproduce_row(fig3_table, i) == fig3_table.rows[i] for i in picks)
    ok = all(checks.values())
    acceptance_report(12, ok, f"bit-identical re-runs ({kernels.BACKEND} backend): "
                      + ", ".join(f"{k}={v}" for k, v in checks.items()))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
