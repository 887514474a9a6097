"""Pure numpy implementation of the batch interference kernel.

Trials are processed in chunks; within a chunk every background point of
every trial is evaluated at once and per-trial sums are accumulated with
``np.bincount`` (sequential, in point order, like the compiled loop).
"""

from __future__ import annotations

import math

import numpy as np

from . import _layout as lay
from ._rng import trial_keys, uniforms_at

_CHUNK_POINTS = 1 << 22


def _main_lobes(u_main, exps, rich, delta, delta_prime, n_values, n_cdf):
    if not rich:
        return delta + (delta_prime - delta) * u_main
    n = n_values[np.minimum(np.searchsorted(n_cdf, u_main, side="right"), len(n_values) - 1)]
    w = np.zeros_like(u_main)
    for j, e in enumerate(exps):
        w = w + np.where(j < n, e, 0.0)
    return w


def _chunk(trials, seed, scenario, density, disk_radius, apothem, alpha, omega, rich,
           delta, delta_prime, gamma, n_values, n_cdf, nmax, count_cdf):
    n_tr = len(trials)
    keys = trial_keys(seed, trials)
    counts = np.searchsorted(count_cdf, uniforms_at(keys, lay.H_COUNT), side="right")
    owner = np.repeat(np.arange(n_tr), counts)
    first = np.cumsum(counts) - counts
    local = np.arange(owner.size) - first[owner]
    pkeys = keys[owner]
    base = (lay.HEADER + (local + 1) * lay.point_stride(nmax)).astype(np.uint64)

    r = disk_radius * np.sqrt(uniforms_at(pkeys, base + lay.P_RADIUS))
    phi = 2.0 * math.pi * uniforms_at(pkeys, base + lay.P_ANGLE)
    x = r * np.cos(phi)
    y = r * np.sin(phi)

    c1 = math.cos(math.pi / 3)
    s1 = math.sin(math.pi / 3)
    c2 = math.cos(2 * math.pi / 3)
    s2 = math.sin(2 * math.pi / 3)

    def outside_hex(px, py):
        m = np.maximum(np.abs(px), np.maximum(np.abs(px * c1 + py * s1), np.abs(px * c2 + py * s2)))
        return m > apothem

    if scenario == lay.SCENARIO_CODE["cluster-center"]:
        mx = np.zeros(n_tr)
        my = np.zeros(n_tr)
        keep = outside_hex(x, y)
    else:
        k = np.minimum((3.0 * uniforms_at(keys, lay.H_RHOMBUS)).astype(np.int64), 2)
        ua = uniforms_at(keys, lay.H_A)
        ub = uniforms_at(keys, lay.H_B)
        rt = 2.0 * apothem / math.sqrt(3.0)
        a0 = math.pi / 6 + 2 * k * math.pi / 3
        a1 = a0 + 2 * math.pi / 3
        bx = rt * (ua * np.cos(a0) + ub * np.cos(a1))
        by = rt * (ua * np.sin(a0) + ub * np.sin(a1))
        L = np.sqrt(-np.log(uniforms_at(keys, lay.H_SERVING)) / (math.pi * density))
        psi = 2.0 * math.pi * uniforms_at(keys, lay.H_DIRECTION)
        mx = bx + L * np.cos(psi)
        my = by + L * np.sin(psi)
        dx = x - mx[owner]
        dy = y - my[owner]
        keep = dx * dx + dy * dy > (L * L)[owner]
        if scenario == lay.SCENARIO_CODE["typical"]:
            keep &= outside_hex(x, y)

    idx = np.flatnonzero(keep)
    o = owner[idx]
    kk = pkeys[idx]
    b = base[idx]
    dx = x[idx] - mx[o]
    dy = y[idx] - my[o]
    d2 = dx * dx + dy * dy
    ly2 = -np.log(uniforms_at(kk, b + lay.P_SERVING)) / (math.pi * density)
    us = uniforms_at(kk, b + lay.P_SIDE)
    g = -np.log(us) if rich else gamma * us
    exps = [-np.log(uniforms_at(kk, b + lay.P_EXP0 + j)) for j in range(nmax)]
    w = _main_lobes(uniforms_at(kk, b + lay.P_MAIN), exps, rich, delta, delta_prime, n_values, n_cdf)
    terms = omega * ly2 ** (alpha / 2) / w * g * d2 ** (-alpha / 2)
    return np.bincount(o, weights=terms, minlength=n_tr)


def interference_batch(start: int, count: int, **args) -> np.ndarray:
    out = np.empty(count)
    mean_pts = max(1.0, float(np.searchsorted(args["count_cdf"], 0.5)))
    step = max(1, int(_CHUNK_POINTS / mean_pts))
    for lo in range(0, count, step):
        hi = min(count, lo + step)
        out[lo:hi] = _chunk(np.arange(start + lo, start + hi, dtype=np.uint64), **args)
    return out
