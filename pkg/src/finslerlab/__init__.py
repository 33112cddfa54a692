"""finslerlab: a numerical Finsler-geometry engine.

Computes the full curvature stack of a Finsler metric from its length
function alone, via truncated multivariate Taylor (jet) arithmetic, and
verifies the classical identity chain numerically on a zoo of concrete
metrics.
"""

from ._kernel import BACKEND
from .jets import Jet, JetSpace, jet_space, lift, FieldHandle
from .metrics import (AdmissibilityError, CustomMetricError, MetricSpec,
                      PointState, get_metric, load_metric, sample_states, zoo)
from .tensors import GeometryPack, pack, flag_curvature
from .measures import bh_sigma, distortion, s_curvature
from .flows import geodesic, parallel_transport, tau_flow_check
from .verify import CheckReport, Tolerances, run_suite, theorem_witness

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Jet", "JetSpace", "jet_space", "lift", "FieldHandle",
    "AdmissibilityError", "CustomMetricError", "MetricSpec", "PointState",
    "get_metric", "load_metric", "sample_states", "zoo",
    "GeometryPack", "pack", "flag_curvature",
    "bh_sigma", "distortion", "s_curvature",
    "geodesic", "parallel_transport", "tau_flow_check",
    "CheckReport", "Tolerances", "run_suite", "theorem_witness",
    "__version__",
]
