"""Scaling exponents of walk displacements and the small-jump statistic."""

from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from ..utils.errors import DomainError
from ..walks.path import WalkPath

EndpointFactory = Callable[[int, int], np.ndarray]


class Statistic(str, Enum):
    MEDIAN = "median"
    RMS = "rms"


def _statistic(endpoints: np.ndarray, statistic: Statistic) -> float:
    size = np.abs(endpoints).max(axis=-1) if endpoints.ndim > 1 else np.abs(endpoints)
    if statistic == Statistic.MEDIAN:
        return float(np.median(size))
    return float(np.sqrt(np.mean(size.astype(np.float64) ** 2)))


def _slope(n_grid: np.ndarray, values: np.ndarray) -> float:
    fit = stats.linregress(np.log(n_grid), np.log(values))
    return float(fit.slope)


class ScalingReport(BaseModel):
    statistic: Statistic
    n_grid: List[int]
    values: List[float] = Field(..., description="Statistic of |X_n| per grid point")
    slope: float
    ci_low: float
    ci_high: float
    variance_over_n: List[float] = Field(..., description="E|X_n|^2 / n per grid point")
    walks_per_n: int
    warnings: List[str] = Field(default_factory=list)

    def top_octave_spread(self, octaves: int = 3) -> float:
        """Relative spread (max - min) / mean of Var(X_n)/n over the last grid points."""
        tail = np.asarray(self.variance_over_n[-octaves:])
        return float((tail.max() - tail.min()) / tail.mean()) if tail.size and tail.mean() > 0 else np.inf

    def to_report(self) -> dict:
        return {**self.model_dump(mode="json"), "top_octave_spread": self.top_octave_spread()}


def scaling_exponent(
    walk_factory: EndpointFactory,
    n_grid: Sequence[int],
    walks_per_n: int,
    statistic: Statistic = Statistic.MEDIAN,
    rng: Optional[np.random.Generator] = None,
    resamples: int = 200,
    level: float = 0.95,
) -> ScalingReport:
    """Least-squares slope of log statistic(|X_n|) against log n.

    Args:
        walk_factory: ``walk_factory(n, count)`` returns (count, d) displacements X_n - X_0
        n_grid: Time points
        walks_per_n: Walks per time point
        statistic: Median or RMS of the sup-norm displacement
        rng: Generator for the bootstrap over walks

    Raises:
        DomainError: fewer than 3 grid points
    """
    n_grid = np.asarray(sorted(set(int(n) for n in n_grid)))
    if n_grid.size < 3:
        raise DomainError(f"scaling fit needs >= 3 grid points, got {n_grid.size}")
    statistic = Statistic(statistic)
    warnings = []
    if np.log2(n_grid[-1] / n_grid[0]) < 4:
        warnings.append("time grid spans fewer than 4 octaves")
    samples = [np.asarray(walk_factory(int(n), walks_per_n), dtype=np.float64) for n in n_grid]
    samples = [s.reshape(s.shape[0], -1) for s in samples]
    values = np.array([_statistic(s, statistic) for s in samples])
    if np.any(values <= 0):
        raise DomainError("statistic vanishes at some grid point; the log-log fit is undefined")
    slope = _slope(n_grid, values)
    rng = rng or np.random.default_rng(0)
    boot = np.empty(resamples)
    for b in range(resamples):
        resampled = [s[rng.integers(0, s.shape[0], s.shape[0])] for s in samples]
        vals = np.array([_statistic(s, statistic) for s in resampled])
        boot[b] = _slope(n_grid, vals) if np.all(vals > 0) else np.nan
    tail = 50.0 * (1.0 - level)
    lo, hi = np.nanpercentile(boot, [tail, 100.0 - tail])
    variance = [float(np.mean((s**2).sum(axis=1)) / n) for s, n in zip(samples, n_grid)]
    return ScalingReport(
        statistic=statistic,
        n_grid=n_grid.tolist(),
        values=values.tolist(),
        slope=slope,
        ci_low=float(lo),
        ci_high=float(hi),
        variance_over_n=variance,
        walks_per_n=walks_per_n,
        warnings=warnings,
    )


def small_jump_mass(path: WalkPath, rho: int, alpha: float, n: Optional[int] = None) -> float:
    """n^{-1/alpha} sum_{i <= n} |X_i - X_{i-1}| 1{jump <= rho}."""
    if rho < 1:
        raise DomainError(f"rho must be >= 1, got {rho}")
    n = path.n_steps if n is None else int(n)
    if n < 1 or n > path.n_steps:
        raise DomainError(f"time n={n} outside [1, {path.n_steps}]")
    jumps = path.jumps[:n]
    return float(jumps[jumps <= rho].sum()) * float(n) ** (-1.0 / alpha)


class SmallJumpReport(BaseModel):
    rho: int
    alpha: float
    n_grid: List[int]
    medians: List[float]
    ratio: float = Field(..., description="Last over first median")
    strictly_decreasing: bool

    def to_report(self) -> dict:
        return self.model_dump()


def small_jump_trend(paths: Sequence[WalkPath], rho: int, alpha: float, n_grid: Sequence[int]) -> SmallJumpReport:
    """Median small-jump mass over an ensemble at every n of the grid."""
    if not paths:
        raise DomainError("small-jump trend needs at least one path")
    n_grid = sorted(int(n) for n in n_grid)
    medians = [float(np.median([small_jump_mass(p, rho, alpha, n) for p in paths])) for n in n_grid]
    ratio = medians[-1] / medians[0] if medians[0] > 0 else 0.0
    return SmallJumpReport(
        rho=rho,
        alpha=alpha,
        n_grid=n_grid,
        medians=medians,
        ratio=ratio,
        strictly_decreasing=bool(np.all(np.diff(medians) < 0)),
    )
