"""Coupling variables, the V* graph and the derived processes."""

from .derived import (
    DerivedPaths,
    DerivedReport,
    IncrementVariables,
    build_derived_processes,
    exchangeability_test,
    increment_variables,
)
from .geometric import (
    CouplingStreams,
    GeomStream,
    TypePool,
    TypeSample,
    excursion_parameter,
    geometric_samples,
    geometric_value,
    side_from_streams,
    side_indicator,
)
from .kconstant import KReport, KSequence, estimate_K, k_sequence, sigma_value
from .vstar import VStar, VStarReport, YPath, excursion_path, random_vstar_fixture, simulate_vstar

__all__ = [
    "CouplingStreams",
    "DerivedPaths",
    "DerivedReport",
    "GeomStream",
    "IncrementVariables",
    "KReport",
    "KSequence",
    "TypePool",
    "TypeSample",
    "VStar",
    "VStarReport",
    "YPath",
    "build_derived_processes",
    "estimate_K",
    "exchangeability_test",
    "excursion_parameter",
    "excursion_path",
    "geometric_samples",
    "geometric_value",
    "increment_variables",
    "k_sequence",
    "random_vstar_fixture",
    "side_from_streams",
    "side_indicator",
    "sigma_value",
    "simulate_vstar",
]
