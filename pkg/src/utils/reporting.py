"""Verbose progress logging with structured stage records."""

import time
from datetime import datetime
from typing import Any, Dict, List, Optional

import click
from pydantic import BaseModel, Field


class StageRecord(BaseModel):
    """One timed stage of a pipeline run."""

    stage: str = Field(..., description="Stage name")
    status: str = Field(default="running", description="running | ok | failed")
    elapsed_s: float = Field(default=0.0, description="Wall-clock seconds")
    details: Dict[str, Any] = Field(default_factory=dict, description="Free-form details")


class StageLogger:
    """Timestamped logger that also keeps a list of stage records.

    Messages are written to stderr only when ``verbose`` is set; stage records
    and warnings are always kept so they can be stored in result records.
    """

    def __init__(self, name: str, verbose: bool = False):
        self.name = name
        self.verbose = verbose
        self.records: List[StageRecord] = []
        self.warnings: List[str] = []
        self._open: Dict[str, float] = {}

    def _log(self, message: str):
        """Log message if verbose mode is enabled."""
        if self.verbose:
            timestamp = datetime.now().strftime("%H:%M:%S")
            click.echo(f"[{timestamp}] {self.name}: {message}", err=True)

    def info(self, message: str):
        self._log(message)

    def warn(self, message: str):
        self.warnings.append(message)
        self._log(f"WARNING {message}")

    def start(self, stage: str, **details: Any) -> None:
        self._open[stage] = time.perf_counter()
        self.records.append(StageRecord(stage=stage, details=dict(details)))
        self._log(f"{stage} ...")

    def finish(self, stage: str, status: str = "ok", **details: Any) -> None:
        began = self._open.pop(stage, None)
        record = self._find(stage)
        if record is None:
            record = StageRecord(stage=stage)
            self.records.append(record)
        record.status = status
        record.elapsed_s = time.perf_counter() - began if began is not None else 0.0
        record.details.update(details)
        self._log(f"{stage} {status} ({record.elapsed_s:.2f}s)")

    def _find(self, stage: str) -> Optional[StageRecord]:
        for record in reversed(self.records):
            if record.stage == stage and record.status == "running":
                return record
        return None

    def mark_interrupted(self) -> None:
        """Mark stages still open as failed (partial-run bookkeeping)."""
        for record in self.records:
            if record.status == "running":
                record.status = "failed"
        self._open.clear()
