"""Factory for the pipeline registry."""

from typing import Dict, Optional

from .base import BasePipeline
from .coupling import CouplingPipeline
from .cutpoints import CutpointsPipeline
from .exploration import ExplorationPipeline
from .heatkernel import HeatKernelPipeline
from .kconstant import KConstantPipeline
from .registry import PipelineRegistry
from .stable import BrownianPipeline, StablePipeline


class PipelineRegistryFactory:
    """Builds and caches the registry of all pipelines."""

    def __init__(self):
        self._registry: Optional[PipelineRegistry] = None

    def _create_pipelines(self) -> Dict[str, BasePipeline]:
        pipelines = [
            StablePipeline(),
            BrownianPipeline(),
            ExplorationPipeline(),
            CouplingPipeline(),
            HeatKernelPipeline(),
            CutpointsPipeline(),
            KConstantPipeline(),
        ]
        return {p.name: p for p in pipelines}

    def create_registry(self) -> PipelineRegistry:
        """
        Create the pipeline registry, once.

        Returns:
            PipelineRegistry with one pipeline per selector
        """
        if self._registry is None:
            registry = PipelineRegistry()
            for pipeline in self._create_pipelines().values():
                registry.register(pipeline)
            self._registry = registry
        return self._registry

    def clear_cache(self) -> None:
        self._registry = None


# Global factory instance
_factory_instance: Optional[PipelineRegistryFactory] = None


def get_pipeline_registry_factory() -> PipelineRegistryFactory:
    """Get the global pipeline registry factory instance."""
    global _factory_instance
    if _factory_instance is None:
        _factory_instance = PipelineRegistryFactory()
    return _factory_instance


def create_registry() -> PipelineRegistry:
    return get_pipeline_registry_factory().create_registry()
