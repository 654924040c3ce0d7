"""Shared utilities: configuration, keyed streams, errors, logging and statistics."""

from .errors import (
    AtomCollisionError,
    BudgetError,
    ConfigError,
    DomainError,
    LabError,
    ModelViolationError,
    PipelineError,
    UnsupportedDimensionError,
)
from .reporting import StageLogger, StageRecord
from .streams import StreamFactory, StreamRole, hash_uniform, keyed_generator

__all__ = [
    "AtomCollisionError",
    "BudgetError",
    "ConfigError",
    "DomainError",
    "LabError",
    "ModelViolationError",
    "PipelineError",
    "StageLogger",
    "StageRecord",
    "StreamFactory",
    "StreamRole",
    "UnsupportedDimensionError",
    "hash_uniform",
    "keyed_generator",
]
