"""Target search under measurement-dependent noise.

Channel models whose noise grows with the probed region, the targeting-rate
functional and its optimiser, error exponents, and Monte Carlo simulators
for stationary and moving targets.
"""

__version__ = "0.1.0"

from .channels import ChannelError, ChannelModel, MonotonicityWarning
from .optimize import OptimumReport, capacity, mi_curve, optimal_query_size
from .report import ResourceGuardError, SimReport

__all__ = [
    "ChannelError",
    "ChannelModel",
    "MonotonicityWarning",
    "OptimumReport",
    "ResourceGuardError",
    "SimReport",
    "capacity",
    "mi_curve",
    "optimal_query_size",
]
