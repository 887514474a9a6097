"""Backend selection for the batch interference kernel.

The compiled extension ``mccsim._kernels`` is used when it imports;
otherwise the numpy implementation in :mod:`mccsim._fallback` takes over.
Set ``MCCSIM_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _fallback
from . import _layout as lay

try:
    if os.environ.get("MCCSIM_BACKEND", "").lower() == "python":
        raise ImportError("compiled backend disabled by MCCSIM_BACKEND")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def kernel_args(cfg) -> dict:
    """Flatten a SimConfig into the scalar/array arguments both kernels take."""
    model = cfg.scattering
    rich = model.kind == "rich"
    return dict(
        seed=int(cfg.seed),
        scenario=lay.SCENARIO_CODE[cfg.scenario],
        density=float(cfg.density),
        disk_radius=float(cfg.disk_radius),
        apothem=float(cfg.apothem),
        alpha=float(cfg.alpha),
        omega=float(cfg.omega),
        rich=int(rich),
        delta=float(model.delta),
        delta_prime=float(model.delta_prime),
        gamma=float(model.gamma),
        n_values=model.support.astype(np.int64) if rich else np.zeros(1, np.int64),
        n_cdf=model.diversity_cdf().astype(np.float64) if rich else np.ones(1),
        nmax=model.nmax,
        count_cdf=lay.poisson_cdf_table(cfg.density * math.pi * cfg.disk_radius**2),
    )


def interference_batch(cfg, start: int, count: int, threads: int = 0, backend: str | None = None) -> np.ndarray:
    """Interference at the typical mobile for trials ``start .. start+count``."""
    backend = backend or BACKEND
    args = kernel_args(cfg)
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        out = np.empty(count, dtype=np.float64)
        _compiled.interference_batch(out, start, threads, **args)
        return out
    return _fallback.interference_batch(start, count, **args)
