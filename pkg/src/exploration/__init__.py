"""Exploration process with lazily revealed environments and special phases."""

from .events import EventReport, event_scan, f_star_frequency, scan_walk
from .process import (
    CouplingRecord,
    ExplorationResult,
    RevealOutcome,
    WalkTranscript,
    read_transcript,
    reveal_long_edges,
    run_exploration,
    write_transcript,
)
from .scales import Scales, scale_parameters
from .state import ExplorationState, ExplorationView
from .types import Phase, estimate_q_grid, psi, type_bin, type_bins, validate_q_grid

__all__ = [
    "CouplingRecord",
    "EventReport",
    "ExplorationResult",
    "ExplorationState",
    "ExplorationView",
    "Phase",
    "RevealOutcome",
    "Scales",
    "WalkTranscript",
    "estimate_q_grid",
    "event_scan",
    "f_star_frequency",
    "psi",
    "read_transcript",
    "reveal_long_edges",
    "run_exploration",
    "scale_parameters",
    "scan_walk",
    "type_bin",
    "type_bins",
    "validate_q_grid",
    "write_transcript",
]
