"""Exception hierarchy shared by every lrplab module."""

from typing import Optional


class LabError(Exception):
    """Base class for all lrplab errors."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedDimensionError(LabError):
    """The operation is only defined for some dimensions (e.g. d=1)."""


class BudgetError(LabError):
    """Refusal to allocate beyond the configured memory budget."""

    def __init__(self, required_bytes: int, budget_bytes: int):
        self.required_bytes = int(required_bytes)
        self.budget_bytes = int(budget_bytes)
        super().__init__(
            f"Estimated memory {self.required_bytes / 2**20:.1f} MiB exceeds "
            f"budget {self.budget_bytes / 2**20:.1f} MiB"
        )


class ModelViolationError(LabError):
    """A structural property guaranteed by the model does not hold."""


class AtomCollisionError(LabError):
    """A q-grid point sits on an atom of the return-probability law."""

    def __init__(self, q: float, mass: float):
        self.q = q
        self.mass = mass
        super().__init__(
            f"Grid point q={q:.6g} carries empirical mass {mass:.3%}; re-grid required"
        )


class ConfigError(LabError):
    """Configuration could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class PipelineError(LabError):
    """A module error re-raised with the pipeline that triggered it."""

    def __init__(self, pipeline: str, cause: BaseException):
        self.pipeline = pipeline
        self.cause = cause
        super().__init__(f"[{pipeline}] {type(cause).__name__}: {cause}")
