"""Pipeline registry for managing available pipelines."""

from typing import Dict, List, Optional

from ..utils.errors import PipelineError
from .base import BasePipeline, PipelineContext, PipelineResult


class PipelineRegistry:
    """Registry for managing the pipelines an experiment can select."""

    def __init__(self):
        self._pipelines: Dict[str, BasePipeline] = {}

    def register(self, pipeline: BasePipeline) -> None:
        """
        Register a pipeline in the registry.

        Args:
            pipeline: Pipeline to register
        """
        self._pipelines[pipeline.name] = pipeline

    def get_pipeline(self, name: str) -> Optional[BasePipeline]:
        return self._pipelines.get(name)

    def list_pipelines(self) -> List[str]:
        return list(self._pipelines.keys())

    def describe(self) -> Dict[str, Dict]:
        """Name, description and checks of every registered pipeline."""
        return {
            name: {"description": p.description, "checks": list(p.checks)}
            for name, p in self._pipelines.items()
        }

    async def execute_pipeline(self, name: str, ctx: PipelineContext) -> PipelineResult:
        """
        Execute a pipeline on a context.

        Args:
            name: Name of the pipeline to execute
            ctx: Context carrying the validated config

        Returns:
            PipelineResult object; exceptions are converted into a failed result
        """
        pipeline = self.get_pipeline(name)
        if not pipeline:
            return PipelineResult(success=False, error=f"Pipeline '{name}' not found")

        errors = pipeline.validate_checks(ctx.config.checks)
        if errors:
            return PipelineResult(success=False, error=f"Check validation failed: {', '.join(errors)}")

        try:
            return await pipeline.execute(ctx)
        except Exception as e:
            ctx.logger.mark_interrupted()
            return PipelineResult(success=False, artifacts=list(ctx.artifacts), error=str(PipelineError(name, e)))

    def clear(self) -> None:
        self._pipelines.clear()
