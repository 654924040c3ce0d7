"""Experiment orchestration and result records."""

from .orchestrator import ExperimentOrchestrator, run_experiment, sweep_trend
from .results import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, ResultRecord, emit_results, exit_code

__all__ = [
    "EXIT_ERROR",
    "EXIT_FAIL",
    "EXIT_PASS",
    "ExperimentOrchestrator",
    "ResultRecord",
    "emit_results",
    "exit_code",
    "run_experiment",
    "sweep_trend",
]
