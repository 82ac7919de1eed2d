"""
csvto.geometry
==============

Constraint-manifold geometry: truncated-SVD Gram pseudo-inverse, tangent
projector, Gauss-Newton feasibility step, projector derivatives and slack
initialization.

Modules
-------
projection
    Projector, feasibility step and projector derivatives.
slack
    Slack-variable helpers for inequality constraints.
"""

from csvto.geometry.projection import (
    DEFAULT_SVD_CUTOFF,
    ProjectionData,
    divergence_of,
    feasibility_step,
    gram_pinv,
    projection_derivative,
    projection_divergence,
    projection_matrix,
)
from csvto.geometry.slack import init_slack

__all__ = [
    "DEFAULT_SVD_CUTOFF",
    "ProjectionData",
    "divergence_of",
    "feasibility_step",
    "gram_pinv",
    "init_slack",
    "projection_derivative",
    "projection_divergence",
    "projection_matrix",
]
