"""Exact samplers of symmetric alpha-stable laws and paths.

The 1-d sampler is the Chambers-Mallows-Stuck transform of a uniform angle
and an exponential. Isotropic vectors are Gaussian vectors run at a positive
(alpha/2)-stable time (Kanter's representation), so both samplers share the
characteristic function exp(-scale^alpha |theta|^alpha).
"""

import csv
import json
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.errors import DomainError
from ..walks.path import Interpolation, StepFunction

CALIBRATION_REFERENCE = 200_000


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")


def sample_stable_1d(alpha: float, n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """n i.i.d. symmetric alpha-stable variates.

    Args:
        alpha: Stability index in (0, 2]; alpha = 2 gives N(0, 2 scale^2), alpha = 1 Cauchy(scale)
        n: Sample size
        rng: Generator
        scale: Scale parameter

    Raises:
        DomainError: alpha outside (0, 2]
    """
    _check_alpha(alpha)
    V = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
    W = rng.exponential(size=n)
    if alpha == 1.0:
        X = np.tan(V)
    else:
        X = (
            np.sin(alpha * V)
            / np.cos(V) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * V) / W) ** ((1.0 - alpha) / alpha)
        )
    return scale * X


def positive_stable(a: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Positive a-stable variates with Laplace transform exp(-s^a), a in (0, 1]."""
    if not 0.0 < a <= 1.0:
        raise DomainError(f"subordinator index must lie in (0, 1], got {a}")
    if a == 1.0:
        return np.ones(size)
    U = rng.uniform(0.0, 1.0, size=size)
    E = rng.exponential(size=size)
    return (np.sin(a * np.pi * U) / np.sin(np.pi * U)) ** (1.0 / a) * (
        np.sin((1.0 - a) * np.pi * U) / E
    ) ** ((1.0 - a) / a)


def sample_isotropic_increment(
    alpha: float, d: int, rng: np.random.Generator, size: Optional[int] = None, scale: float = 1.0
) -> np.ndarray:
    """Rotationally invariant alpha-stable vectors in R^d: sqrt(2 A) G.

    Returns a (d,) vector, or (size, d) when ``size`` is given.
    """
    _check_alpha(alpha)
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    count = 1 if size is None else size
    A = positive_stable(alpha / 2.0, count, rng)
    G = rng.standard_normal((count, d))
    X = scale * np.sqrt(2.0 * A)[:, None] * G
    return X[0] if size is None else X


class StablePath(BaseModel):
    """A stable process on a time grid of [0, 1]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: float = Field(..., gt=0.0, le=2.0)
    d: int = Field(..., ge=1)
    grid: np.ndarray = Field(..., description="t_0 < ... < t_m")
    increments: np.ndarray = Field(..., description="(m, d) increments per cell")
    scale: float = 1.0

    def values(self) -> np.ndarray:
        """(m+1, d) process values with Gamma(t_0) = 0."""
        return np.concatenate([np.zeros((1, self.d)), np.cumsum(self.increments, axis=0)])

    def at(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """Right-continuous evaluation on the grid."""
        idx = np.searchsorted(self.grid, np.asarray(t, dtype=np.float64), side="right") - 1
        return self.values()[np.clip(idx, 0, self.grid.size - 1)]

    def to_step_function(self) -> StepFunction:
        """Step function on a uniform grid; the grid must be uniform on [0, 1]."""
        m = self.grid.size - 1
        if not np.allclose(self.grid, np.linspace(0.0, 1.0, m + 1)):
            raise DomainError("step functions need the uniform grid on [0, 1]")
        return StepFunction(n=m, a=1.0 / self.alpha, values=self.values(), mode=Interpolation.STEP)


def stable_path(
    alpha: float, d: int, grid: Sequence[float], rng: np.random.Generator, scale: float = 1.0
) -> StablePath:
    """Independent increments scaled by (dt)^{1/alpha} over ``grid``."""
    _check_alpha(alpha)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be strictly increasing with at least two points")
    dt = np.diff(grid)
    if d == 1:
        base = sample_stable_1d(alpha, dt.size, rng)[:, None]
    else:
        base = sample_isotropic_increment(alpha, d, rng, size=dt.size)
    increments = scale * dt[:, None] ** (1.0 / alpha) * base
    return StablePath(alpha=alpha, d=d, grid=grid, increments=increments, scale=scale)


class CalibrationReport(BaseModel):
    alpha: float
    scale: float
    method: str = "median-quantile"
    sample_size: int
    sample_median: float
    reference_median: float

    def to_report(self) -> dict:
        return self.model_dump()

    def write(self, target: Union[str, Path]) -> Path:
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_report(), sort_keys=True, indent=2) + "\n")
        return target


def calibrate_scale(
    sample: np.ndarray, alpha: float, rng: np.random.Generator, reference_size: int = CALIBRATION_REFERENCE
) -> CalibrationReport:
    """Scale c such that median |sample| = c * median |standard stable|.

    ``sample`` is 1-d, or (n, d) in which case Euclidean norms are matched
    against the isotropic sampler.
    """
    _check_alpha(alpha)
    sample = np.asarray(sample, dtype=np.float64)
    if sample.size == 0:
        raise DomainError("cannot calibrate on an empty sample")
    if sample.ndim == 1 or sample.shape[1] == 1:
        sizes = np.abs(sample.ravel())
        reference = np.abs(sample_stable_1d(alpha, reference_size, rng))
    else:
        sizes = np.linalg.norm(sample, axis=1)
        reference = np.linalg.norm(sample_isotropic_increment(alpha, sample.shape[1], rng, size=reference_size), axis=1)
    med, ref = float(np.median(sizes)), float(np.median(reference))
    if med == 0.0:
        raise DomainError("sample median is zero; the scale is not identifiable")
    return CalibrationReport(
        alpha=alpha, scale=med / ref, sample_size=int(sizes.size), sample_median=med, reference_median=ref
    )


def dump_samples(samples: np.ndarray, target: Union[str, Path]) -> Path:
    """Columnar CSV of a sample: one column per coordinate."""
    samples = np.asarray(samples)
    if samples.ndim == 1:
        samples = samples[:, None]
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x{k + 1}" for k in range(samples.shape[1])])
        writer.writerows(samples.tolist())
    return target
