"""Experiment orchestrator: runs pipelines, collects records, sweeps grids."""

import asyncio
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np

from ..pipelines.base import CheckVerdict, PipelineContext, plain
from ..pipelines.factory import create_registry
from ..pipelines.registry import PipelineRegistry
from ..utils.config import ExperimentConfig
from ..utils.reporting import StageLogger
from .results import ResultRecord


class ExperimentOrchestrator:
    """Runs experiments through the pipeline registry.

    Independent experiments (sweep points, acceptance presets) run concurrently
    up to ``workers``; keyed streams make the results independent of the order.
    """

    def __init__(
        self,
        registry: Optional[PipelineRegistry] = None,
        workers: int = 1,
        verbose: bool = False,
        event_callback: Optional[Any] = None,
    ):
        self.registry = registry or create_registry()
        self.workers = max(1, int(workers))
        self.verbose = verbose
        self.event_callback = event_callback
        self.records: List[ResultRecord] = []

    def _log(self, message: str):
        """Log message if verbose mode is enabled."""
        if self.verbose:
            timestamp = datetime.now().strftime("%H:%M:%S")
            click.echo(f"[{timestamp}] {message}", err=True)

    async def _emit(self, event_type: str, data: Dict[str, Any]):
        """Emit an event to the callback if registered."""
        if self.event_callback is not None:
            await self.event_callback(event_type, data)

    @staticmethod
    def output_dir(config: ExperimentConfig, name: str) -> Path:
        return Path(config.output.out) / f"{name}-{config.config_hash()[:12]}"

    async def run_experiment(
        self,
        config: ExperimentConfig,
        name: Optional[str] = None,
        criterion: Optional[int] = None,
        input_hash: Optional[str] = None,
    ) -> ResultRecord:
        """
        Run the selected pipeline of one config and write its record.

        Args:
            config: Validated experiment
            name: Record name; defaults to the pipeline name
            criterion: Acceptance criterion number, when run as a preset
            input_hash: Blob hash of the config file

        Returns:
            ResultRecord; a failing pipeline yields status "failed" (checks ran
            partially) or "error" (nothing usable)
        """
        name = name or config.pipeline.value
        out_dir = self.output_dir(config, name)
        logger = StageLogger(name, verbose=self.verbose)
        ctx = PipelineContext(config, out_dir, logger)
        self._log(f"{name}: pipeline {config.pipeline.value}, seed {config.seed}")
        await self._emit("start", {"name": name, "pipeline": config.pipeline.value, "config_hash": config.config_hash()})

        began = time.perf_counter()
        result = await self.registry.execute_pipeline(config.pipeline.value, ctx)
        elapsed = time.perf_counter() - began

        if result.success:
            status = "ok"
        else:
            status = "failed" if result.result else "error"
        record = ResultRecord(
            name=name,
            criterion=criterion,
            pipeline=config.pipeline.value,
            seed=config.seed,
            config_hash=config.config_hash(),
            input_hash=input_hash,
            status=status,
            error=result.error,
            checks=result.checks,
            reports=plain(result.result),
            stages=logger.records,
            warnings=logger.warnings,
            elapsed_s=elapsed,
            artifacts=result.artifacts,
        )
        ctx.write_json("record.json", record.to_report())
        self.records.append(record)
        if result.error:
            self._log(f"{name}: {result.error}")
        self._log(f"{name}: {'PASS' if record.passed else 'FAIL'} in {elapsed:.1f}s")
        await self._emit("complete", {"name": name, "status": status, "passed": record.passed})
        return record

    async def run_many(self, jobs: Sequence[Dict[str, Any]]) -> List[ResultRecord]:
        """Run ``run_experiment(**job)`` for every job, at most ``workers`` at a time, in job order."""
        semaphore = asyncio.Semaphore(self.workers)

        async def bounded(job: Dict[str, Any]) -> ResultRecord:
            async with semaphore:
                return await self.run_experiment(**job)

        return list(await asyncio.gather(*(bounded(job) for job in jobs)))

    async def sweep(self, config: ExperimentConfig, s_values: Sequence[float]) -> List[ResultRecord]:
        """One record per tail exponent, same seed and grids."""
        jobs = []
        for s in s_values:
            model = config.model.model_copy(update={"s": float(s)})
            point = config.with_overrides(**{"model": model.model_dump(mode="json")})
            jobs.append({"config": point, "name": f"{config.pipeline.value}-s{s:g}"})
        await self._emit("sweep", {"points": len(jobs)})
        return await self.run_many(jobs)

    def get_execution_summary(self) -> Dict[str, Any]:
        """Get summary of execution."""
        return {
            "experiments": len(self.records),
            "passed": sum(r.passed for r in self.records),
            "failed": sum(r.status == "failed" or (r.status == "ok" and not r.passed) for r in self.records),
            "errors": sum(r.status == "error" for r in self.records),
            "elapsed_s": sum(r.elapsed_s for r in self.records),
            "pipeline_breakdown": {
                p: len([r for r in self.records if r.pipeline == p]) for p in sorted({r.pipeline for r in self.records})
            },
        }


def sweep_trend(records: Sequence[ResultRecord], s_values: Sequence[float], d: int) -> Dict[str, Any]:
    """alpha-hat = 1 / slope across a sweep, checked for monotonicity in s."""
    alpha_hat = []
    for r in records:
        slope = r.reports.get("scaling", {}).get("scaling", {}).get("slope")
        alpha_hat.append(1.0 / slope if slope else float("nan"))
    values = np.asarray(alpha_hat)
    order = np.argsort(np.asarray(s_values))
    monotone = bool(np.all(np.isfinite(values)) and np.all(np.diff(values[order]) > 0))
    return {
        "s": [float(s) for s in s_values],
        "alpha": [float(s) - d for s in s_values],
        "alpha_hat": [float(a) for a in alpha_hat],
        "monotone": monotone,
        "check": CheckVerdict(
            check="sweep", statistic="alpha-hat increasing in s", value=float(monotone), target="true", passed=monotone
        ),
    }


def run_experiment(config: ExperimentConfig, verbose: bool = False, **kwargs: Any) -> ResultRecord:
    """Synchronous entry point for a single experiment."""
    return asyncio.run(ExperimentOrchestrator(verbose=verbose).run_experiment(config, **kwargs))
