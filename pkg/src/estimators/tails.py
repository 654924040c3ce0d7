"""Tail-index estimation and survival envelopes."""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..utils.errors import DomainError
from ..utils.stats import bootstrap_ci

MIN_SAMPLES = 100
MAX_FRACTION = 0.2
ZMAX_MIN_SAMPLES = 10_000


class TailEstimate(BaseModel):
    """Hill estimate of a power-law tail index."""

    alpha_hat: float = Field(..., gt=0.0, description="Estimated tail index")
    top_fraction: float = Field(..., description="Fraction of order statistics used")
    k: int = Field(..., description="Number of top order statistics")
    ci_low: float
    ci_high: float
    n: int = Field(..., description="Sample size")

    @property
    def ci_half_width(self) -> float:
        return max(0.0, 0.5 * (self.ci_high - self.ci_low))

    def to_report(self) -> dict:
        return {**self.model_dump(), "ci_half_width": self.ci_half_width}


def _hill(sorted_desc: np.ndarray, k: int) -> float:
    logs = np.log(sorted_desc[:k]) - np.log(sorted_desc[k])
    mean = float(logs.mean())
    return 1.0 / mean if mean > 0 else np.nan


def hill_tail_index(
    samples: Sequence[float],
    top_fraction: float = 0.01,
    rng: Optional[np.random.Generator] = None,
    resamples: int = 200,
    level: float = 0.95,
) -> TailEstimate:
    """Hill estimator 1 / mean log(X_(i) / X_(k+1)) over the top k = floor(fraction n).

    Args:
        samples: Positive observations
        top_fraction: Fraction of top order statistics, in (0, 0.2]
        rng: Generator for the bootstrap interval
        resamples: Bootstrap resamples
        level: Interval level

    Raises:
        DomainError: fewer than 100 samples, nonpositive samples, a fraction
            outside (0, 0.2], or zero log-spacings
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < MIN_SAMPLES:
        raise DomainError(f"Hill estimator needs >= {MIN_SAMPLES} samples, got {x.size}")
    if not 0.0 < top_fraction <= MAX_FRACTION:
        raise DomainError(f"top fraction must lie in (0, {MAX_FRACTION}], got {top_fraction}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("Hill estimator needs positive finite samples")
    k = max(1, int(np.floor(top_fraction * x.size)))
    ordered = np.sort(x)[::-1]
    alpha_hat = _hill(ordered, k)
    if not np.isfinite(alpha_hat):
        raise DomainError("degenerate sample: zero log-spacings among the top order statistics")
    rng = rng or np.random.default_rng(0)
    lo, hi = bootstrap_ci(x, lambda b: _hill(np.sort(b)[::-1], k), rng, resamples, level)
    return TailEstimate(alpha_hat=alpha_hat, top_fraction=top_fraction, k=k, ci_low=lo, ci_high=hi, n=int(x.size))


def hill_sensitivity(
    samples: Sequence[float],
    fractions: Sequence[float] = (0.002, 0.005, 0.01, 0.02, 0.05, 0.1),
    rng: Optional[np.random.Generator] = None,
    resamples: int = 200,
) -> List[TailEstimate]:
    """Hill estimates over a sweep of top fractions; degenerate fractions are skipped."""
    rng = rng or np.random.default_rng(0)
    out = []
    for fraction in fractions:
        try:
            out.append(hill_tail_index(samples, fraction, rng, resamples))
        except DomainError:
            continue
    return out


class ZmaxReport(BaseModel):
    """Fitted envelope c y^{-alpha} of an empirical survival function."""

    alpha: float
    c: float
    tolerance: float
    y_grid: List[float]
    survival: List[float]
    envelope: List[float]
    violations: int
    degenerate: bool = Field(default=False, description="Survival vanishes on the whole grid")
    n: int
    warnings: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_report(self) -> dict:
        return {**self.model_dump(), "passed": self.passed}


def zmax_tail_check(
    samples: Sequence[float],
    alpha: float,
    y_lo: float = 1.0,
    decades: float = 1.0,
    points: int = 21,
    tolerance: float = 0.1,
) -> ZmaxReport:
    """Fit c on the lower half-decade and count violations over the whole range.

    c = (1 + tolerance) max_{y in lower half-decade} S(y) y^alpha; a grid point
    violates when S(y) > c y^{-alpha} + 3 SE(y).
    """
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    x = np.abs(np.asarray(samples, dtype=np.float64).ravel())
    warnings = []
    if x.size < ZMAX_MIN_SAMPLES:
        warnings.append(f"only {x.size} samples; the envelope check expects >= {ZMAX_MIN_SAMPLES}")
    y = y_lo * np.logspace(0.0, decades, points)
    ordered = np.sort(x)
    S = 1.0 - np.searchsorted(ordered, y, side="right") / max(x.size, 1)
    se = np.sqrt(S * (1.0 - S) / max(x.size, 1))
    lower = y <= y_lo * 10.0 ** (decades / 2.0)
    degenerate = bool(np.all(S == 0.0))
    c = float((1.0 + tolerance) * np.max(S[lower] * y[lower] ** alpha))
    envelope = c * y ** (-alpha)
    violations = 0 if degenerate else int(np.sum(S > envelope + 3.0 * se))
    return ZmaxReport(
        alpha=alpha,
        c=c,
        tolerance=tolerance,
        y_grid=y.tolist(),
        survival=S.tolist(),
        envelope=envelope.tolist(),
        violations=violations,
        degenerate=degenerate,
        n=int(x.size),
        warnings=warnings,
    )
