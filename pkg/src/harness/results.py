"""Result records and their json, csv and markdown renditions."""

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field

from ..pipelines.base import CheckVerdict
from ..utils.config import OutputFormat, canonical_json
from ..utils.errors import LabError
from ..utils.reporting import StageRecord

CSV_COLUMNS = ("criterion", "name", "pipeline", "check", "statistic", "value", "target", "passed")

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


class ResultRecord(BaseModel):
    """Outcome of one experiment."""

    name: str = Field(..., description="Experiment or preset name")
    criterion: Optional[int] = Field(default=None, description="Acceptance criterion number")
    pipeline: str
    seed: int
    config_hash: str = Field(..., description="sha256 of the canonical config")
    input_hash: Optional[str] = Field(default=None, description="Git-style blob hash of the config file")
    status: str = Field(default="ok", description="ok | failed | error")
    error: Optional[str] = None
    checks: List[CheckVerdict] = Field(default_factory=list)
    reports: Dict[str, Any] = Field(default_factory=dict)
    stages: List[StageRecord] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    elapsed_s: float = 0.0
    artifacts: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(c.passed is not False for c in self.checks)

    def content_hash(self) -> str:
        """Hash of everything a deterministic rerun reproduces (no timings)."""
        payload = {
            "config_hash": self.config_hash,
            "input_hash": self.input_hash,
            "status": self.status,
            "checks": [c.model_dump(mode="json") for c in self.checks],
            "reports": self.reports,
        }
        return hashlib.sha256(canonical_json(payload).encode()).hexdigest()

    def to_report(self) -> dict:
        return {**self.model_dump(mode="json"), "passed": self.passed, "content_hash": self.content_hash()}


def exit_code(records: Sequence[ResultRecord]) -> int:
    """0 when every check passes, 1 on any execution error, else 2."""
    if any(r.status == "error" for r in records):
        return EXIT_ERROR
    return EXIT_PASS if all(r.passed for r in records) else EXIT_FAIL


def _rows(records: Sequence[ResultRecord]) -> List[Dict[str, Any]]:
    rows = []
    for r in records:
        for c in r.checks:
            rows.append(
                {
                    "criterion": "" if r.criterion is None else r.criterion,
                    "name": r.name,
                    "pipeline": r.pipeline,
                    "check": c.check,
                    "statistic": c.statistic,
                    "value": "" if c.value is None else repr(c.value),
                    "target": c.target,
                    "passed": "" if c.passed is None else str(c.passed).lower(),
                }
            )
    return rows


def render_json(records: Sequence[ResultRecord]) -> str:
    return json.dumps([r.to_report() for r in records], sort_keys=True, indent=2) + "\n"


def render_csv(records: Sequence[ResultRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(_rows(records))
    return buffer.getvalue()


def _verdict_word(passed: Optional[bool]) -> str:
    return {True: "PASS", False: "FAIL", None: "info"}[passed]


def render_summary(records: Sequence[ResultRecord]) -> str:
    """One-page markdown summary with the acceptance table."""
    lines = ["# lrplab results", "", "| # | experiment | statistic | value | target | verdict |", "|---|---|---|---|---|---|"]
    for r in records:
        crit = "" if r.criterion is None else str(r.criterion)
        if r.status == "error":
            lines.append(f"| {crit} | {r.name} | execution | | | ERROR |")
        for c in r.checks:
            value = "" if c.value is None else f"{c.value:.6g}"
            lines.append(f"| {crit} | {r.name} | {c.statistic} | {value} | {c.target} | {_verdict_word(c.passed)} |")
    passed = sum(r.passed for r in records)
    lines += ["", f"{passed}/{len(records)} experiments passed."]
    errors = [r for r in records if r.error]
    if errors:
        lines += ["", "## Errors", ""]
        lines += [f"- {r.name}: {r.error}" for r in errors]
    return "\n".join(lines) + "\n"


_RENDERERS = {
    OutputFormat.JSON: ("results.json", render_json),
    OutputFormat.CSV: ("results.csv", render_csv),
    OutputFormat.MD: ("summary.md", render_summary),
}


def emit_results(
    records: Union[ResultRecord, Sequence[ResultRecord]],
    out_dir: Union[str, Path],
    formats: Union[OutputFormat, Sequence[OutputFormat]] = OutputFormat.JSON,
) -> List[Path]:
    """Write records in each format; identical records give byte-identical files.

    Raises:
        LabError: the output directory cannot be written
    """
    if isinstance(records, ResultRecord):
        records = [records]
    if isinstance(formats, (OutputFormat, str)):
        formats = [formats]
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for fmt in formats:
            name, render = _RENDERERS[OutputFormat(fmt)]
            target = out / name
            target.write_text(render(records))
            written.append(target)
    except OSError as e:
        raise LabError(f"cannot write results to {out}: {e}") from e
    return written
