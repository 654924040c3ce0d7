"""Long-range percolation environments."""

from .bands import DisplacementBands
from .clusters import ClusterLabeling, UnionFind, analyze_clusters
from .cutpoints import CutpointSet, cutpoint_density, detect_cutpoints
from .generator import Environment, edge_uniform, generate_environment, memory_estimate
from .model import (
    Boundary,
    Lattice,
    ModelParams,
    Norm,
    connection_probability,
    expected_degree,
    expected_long_edge_count,
    pair_probability,
)
from .snapshot import load_snapshot, save_snapshot

__all__ = [
    "Boundary",
    "ClusterLabeling",
    "CutpointSet",
    "DisplacementBands",
    "Environment",
    "Lattice",
    "ModelParams",
    "Norm",
    "UnionFind",
    "analyze_clusters",
    "connection_probability",
    "cutpoint_density",
    "detect_cutpoints",
    "edge_uniform",
    "expected_degree",
    "expected_long_edge_count",
    "generate_environment",
    "load_snapshot",
    "memory_estimate",
    "pair_probability",
    "save_snapshot",
]
