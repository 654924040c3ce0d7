"""Experiment pipelines, one per selector."""

from .base import BasePipeline, CheckVerdict, PipelineContext, PipelineResult
from .factory import PipelineRegistryFactory, create_registry, get_pipeline_registry_factory
from .registry import PipelineRegistry

__all__ = [
    "BasePipeline",
    "CheckVerdict",
    "PipelineContext",
    "PipelineRegistry",
    "PipelineRegistryFactory",
    "PipelineResult",
    "create_registry",
    "get_pipeline_registry_factory",
]
