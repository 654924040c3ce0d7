"""Simple random walks, local balls and rescaled paths."""

from .ball import EXACT_MAX_STATES, GraphView, LocalBall, ReturnEstimate, hitting_probability
from .dump import dump_path, load_path
from .engine import (
    IntersectionReport,
    OccupationReport,
    assemble_path,
    endpoint_displacements,
    intersection_counts,
    occupation_vs_degree,
    run_ensemble,
    run_walk,
    stationary_distribution,
    wraparound_fraction,
)
from .path import (
    Interpolation,
    PathNorm,
    StepFunction,
    WalkPath,
    lq_distance,
    new_vertex_indicators,
    rescale_path,
)

__all__ = [
    "EXACT_MAX_STATES",
    "GraphView",
    "Interpolation",
    "IntersectionReport",
    "LocalBall",
    "OccupationReport",
    "PathNorm",
    "ReturnEstimate",
    "StepFunction",
    "WalkPath",
    "assemble_path",
    "dump_path",
    "endpoint_displacements",
    "hitting_probability",
    "intersection_counts",
    "load_path",
    "lq_distance",
    "new_vertex_indicators",
    "occupation_vs_degree",
    "rescale_path",
    "run_ensemble",
    "run_walk",
    "stationary_distribution",
    "wraparound_fraction",
]
