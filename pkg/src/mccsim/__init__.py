"""Outage analysis for clustered multi-cell cooperation in Poisson cellular networks.

Submodules: :mod:`geometry` (PPP and hexagonal clusters), :mod:`channel`
(beam gains, channel inversion), :mod:`simcore` (Monte Carlo outage
engine), :mod:`analytics` (closed forms, tails, OPE bounds) and
:mod:`harness` (experiments, persistence, CLI support).
"""

__version__ = "0.1.0"

from .channel import ScatteringModel
from .errors import CalibrationUnavailable, InvalidParameter, NumericalFailure, SingularityError
from .kernels import BACKEND
from .simcore import OutageEstimate, SimConfig, estimate_outage

__all__ = [
    "BACKEND",
    "CalibrationUnavailable",
    "InvalidParameter",
    "NumericalFailure",
    "OutageEstimate",
    "ScatteringModel",
    "SimConfig",
    "SingularityError",
    "estimate_outage",
    "__version__",
]
