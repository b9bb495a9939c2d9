"""Numerical toolkit for complex Finsler metrics: tensor pipeline, metric classification,
projective-relatedness checks and geodesic integration."""

__version__ = "0.1.0"

from .jet import WirtingerPoint, evaluate_jet, partial  # noqa: E402,F401
from .zoo import MetricExpr, euclidean, disk_metric, builtin  # noqa: E402,F401
