"""Small statistical helpers shared by the simulation and estimator modules."""

from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import DomainError


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("Wilson interval needs at least one trial")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def bootstrap_ci(
    data: np.ndarray,
    statistic: Callable[[np.ndarray], float],
    rng: np.random.Generator,
    resamples: int = 200,
    level: float = 0.95,
) -> Tuple[float, float]:
    """Percentile bootstrap interval of ``statistic`` over the first axis."""
    data = np.asarray(data)
    n = data.shape[0]
    values = np.empty(resamples)
    for b in range(resamples):
        values[b] = statistic(data[rng.integers(0, n, size=n)])
    tail = 50.0 * (1.0 - level)
    lo, hi = np.nanpercentile(values, [tail, 100.0 - tail])
    return float(lo), float(hi)


def dyadic_grid(lo_exp: int, hi_exp: int, step: int = 1) -> list:
    """[2^lo, 2^(lo+step), ..., 2^hi]."""
    if hi_exp < lo_exp:
        raise DomainError(f"empty dyadic grid 2^{lo_exp}..2^{hi_exp}")
    return [1 << e for e in range(lo_exp, hi_exp + 1, step)]


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    result = stats.ks_2samp(np.asarray(a), np.asarray(b))
    return float(result.statistic), float(result.pvalue)


def ks_against_geometric(samples: np.ndarray, t: float) -> float:
    """Sup distance between the empirical CDF and Geom(t) on {0, 1, ...}.

    Geom(t) counts failures before the first success: P(R = r) = (1 - t)^r t.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        return 0.0
    top = int(samples.max())
    r = np.arange(top + 1)
    empirical = np.searchsorted(np.sort(samples), r, side="right") / samples.size
    theoretical = 1.0 - (1.0 - t) ** (r + 1)
    # left limits at the atoms
    below = np.concatenate([[0.0], empirical[:-1]])
    below_theory = np.concatenate([[0.0], theoretical[:-1]])
    return float(max(np.abs(empirical - theoretical).max(), np.abs(below - below_theory).max()))
