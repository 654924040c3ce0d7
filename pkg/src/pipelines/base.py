"""Base classes for experiment pipelines."""

import asyncio
import json
from abc import ABC
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..percolation.clusters import analyze_clusters
from ..percolation.generator import Environment, generate_environment
from ..percolation.model import ModelParams
from ..utils.config import ExperimentConfig
from ..utils.errors import PipelineError
from ..utils.reporting import StageLogger
from ..utils.streams import StreamFactory, StreamRole


class CheckVerdict(BaseModel):
    """One pass/fail line of a pipeline; ``passed`` is None for report-only lines."""

    check: str = Field(..., description="Check that produced the verdict")
    statistic: str = Field(..., description="What was measured")
    value: Optional[float] = Field(default=None, description="Measured value")
    target: str = Field(..., description="Acceptance target in words")
    passed: Optional[bool] = Field(default=None, description="Verdict, None when informational")


class PipelineResult(BaseModel):
    """Result of a pipeline execution."""

    success: bool = Field(..., description="Whether the pipeline executed successfully")
    result: Dict[str, Any] = Field(default_factory=dict, description="Reports keyed by check")
    checks: List[CheckVerdict] = Field(default_factory=list, description="Verdicts of all checks run")
    artifacts: List[str] = Field(default_factory=list, description="Files written")
    error: Optional[str] = Field(default=None, description="Error message if execution failed")


class PipelineContext:
    """Everything a check needs: config, logger, output directory and a shared cache."""

    def __init__(self, config: ExperimentConfig, out_dir: Path, logger: Optional[StageLogger] = None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.logger = logger or StageLogger(config.pipeline.value)
        self.streams = StreamFactory(config.seed)
        self.artifacts: List[str] = []
        self.cache: Dict[str, Any] = {}

    @property
    def params(self) -> ModelParams:
        return self.config.model

    def rng(self, *index: int) -> np.random.Generator:
        return self.streams.generator(StreamRole.MONTE_CARLO, *index)

    def child_seed(self, *index: int) -> int:
        return self.streams.child_seed(StreamRole.MONTE_CARLO, *index)

    def environment(self, index: int = 0, params: Optional[ModelParams] = None, method: str = "skip") -> Environment:
        """Environment number ``index`` of this experiment, cached per (index, params)."""
        params = params or self.params
        key = f"env:{index}:{params.model_dump_json()}:{method}"
        if key not in self.cache:
            seed = self.config.seed if index == 0 else self.child_seed(0, index)
            self.cache[key] = generate_environment(params, seed, method=method)
        return self.cache[key]

    def forget(self, prefix: str) -> None:
        """Drop cached objects whose key starts with ``prefix``."""
        for key in [k for k in self.cache if k.startswith(prefix)]:
            del self.cache[key]

    def start_vertex(self, env: Environment) -> int:
        """Origin when nearest-neighbour edges are forced, else the first vertex of the largest cluster."""
        if env.params.nn_prob_one:
            return 0
        return int(np.flatnonzero(analyze_clusters(env).largest_mask)[0])

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def record(self, path: Path) -> str:
        self.artifacts.append(str(path))
        return str(path)

    def write_json(self, name: str, data: Any) -> str:
        target = self.path(name)
        target.write_text(json.dumps(data, sort_keys=True, indent=2, default=_jsonable) + "\n")
        return self.record(target)


def plain(data: Any) -> Any:
    """Deep copy with numpy scalars and arrays turned into builtins."""
    return json.loads(json.dumps(data, default=_jsonable))


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.floating, np.bool_)):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


CheckOutput = Tuple[Dict[str, Any], List[CheckVerdict]]


class BasePipeline(ABC):
    """A named sequence of checks, each a method ``check_<name>(ctx)``.

    Checks run in declaration order. A failing check stops the pipeline; the
    reports of the checks that completed are kept in the result.
    """

    checks: Tuple[str, ...] = ()

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    def _method(self, check: str) -> Callable[[PipelineContext], CheckOutput]:
        return getattr(self, f"check_{check}")

    def validate_checks(self, requested: Optional[List[str]]) -> List[str]:
        """
        Validate a requested subset of checks.

        Args:
            requested: Check names, or None for all

        Returns:
            List of error messages, empty if valid
        """
        return [f"Unknown check for {self.name}: {c}" for c in (requested or []) if c not in self.checks]

    def selected(self, requested: Optional[List[str]]) -> List[str]:
        if not requested:
            return list(self.checks)
        return [c for c in self.checks if c in requested]

    def run(self, ctx: PipelineContext) -> PipelineResult:
        """Run the selected checks synchronously."""
        result = PipelineResult(success=True)
        for check in self.selected(ctx.config.checks):
            ctx.logger.start(check)
            try:
                report, verdicts = self._method(check)(ctx)
            except Exception as e:
                ctx.logger.finish(check, status="failed", error=str(e))
                result.success = False
                result.error = str(PipelineError(f"{self.name}.{check}", e))
                break
            result.result[check] = report
            result.checks.extend(verdicts)
            ctx.logger.finish(check, verdicts=len(verdicts))
        result.artifacts = list(ctx.artifacts)
        return result

    async def execute(self, ctx: PipelineContext) -> PipelineResult:
        """
        Execute the pipeline in a worker thread.

        Args:
            ctx: Pipeline context

        Returns:
            PipelineResult object containing the reports and verdicts
        """
        return await asyncio.to_thread(self.run, ctx)


def within(value: float, expected: float, tol: float) -> bool:
    return bool(np.isfinite(value) and abs(value - expected) <= tol)


def verdict(check: str, statistic: str, value: Optional[float], target: str, passed: Optional[bool]) -> CheckVerdict:
    v = None if value is None or not np.isfinite(value) else float(value)
    return CheckVerdict(check=check, statistic=statistic, value=v, target=target, passed=passed)
