"""Discrete reference processes: i.i.d. lattice jumps Y with P(Y = y)
proportional to the long-edge law P(||y||), in the stable domain of attraction."""

from typing import Optional

import numpy as np

from ..percolation.bands import DisplacementBands
from ..percolation.model import ModelParams, long_edge_probability
from ..utils.errors import DomainError
from ..walks.path import WalkPath

TABLE_MAX = 1 << 16
CHUNK = 1 << 22


def default_window(n: int, alpha: float) -> int:
    """A jump radius far beyond the n^{1/alpha} scale of n-step sums."""
    return int(max(TABLE_MAX, np.ceil(1000.0 * float(n) ** (1.0 / alpha))))


class ReferenceJumpLaw:
    """Jump law on 1 <= ||y||_inf <= r_max.

    In d = 1 radii up to ``table_max`` come from an inverted CDF table and the
    remaining window from a rounded continuous r^{-s} tail. In d >= 2 the
    dyadic band envelope of the environment generator is used.

    Raises:
        DomainError: s outside (d, d + 1) or an unbounded window
    """

    def __init__(self, params: ModelParams, r_max: int, table_max: int = TABLE_MAX):
        if not params.d < params.s < params.d + 1:
            raise DomainError(f"reference jumps need d < s < d + 1, got s={params.s}, d={params.d}")
        if r_max is None or not np.isfinite(r_max) or r_max < 1:
            raise DomainError(f"nonsummable configuration: jump window r_max={r_max}")
        self.params = params
        self.d = params.d
        self.r_max = int(r_max)
        self.bands: Optional[DisplacementBands] = None
        if self.d == 1:
            self.top = min(self.r_max, int(table_max))
            r = np.arange(1, self.top + 1, dtype=np.float64)
            weights = np.asarray(long_edge_probability(r, params))
            cdf = np.cumsum(weights)
            self.table_mass = float(cdf[-1])
            self._cdf = cdf / cdf[-1]
            self.tail_mass = 0.0
            if self.r_max > self.top:
                a, b, s = self.top + 0.5, self.r_max + 0.5, params.s
                self.tail_mass = params.beta * (a ** (1 - s) - b ** (1 - s)) / (s - 1)
        else:
            self.bands = DisplacementBands(params, 0, self.r_max)

    @property
    def tail_fraction(self) -> float:
        if self.d != 1:
            return 0.0
        return self.tail_mass / (self.table_mass + self.tail_mass)

    def _radii_1d(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.int64)
        tail = rng.random(n) < self.tail_fraction
        k = int((~tail).sum())
        idx = np.searchsorted(self._cdf, rng.random(k), side="right")
        out[~tail] = np.minimum(idx, self.top - 1) + 1
        if tail.any():
            a, b, s = self.top + 0.5, self.r_max + 0.5, self.params.s
            u = rng.random(int(tail.sum()))
            r = (a ** (1 - s) - u * (a ** (1 - s) - b ** (1 - s))) ** (1.0 / (1 - s))
            out[tail] = np.clip(np.rint(r), self.top + 1, self.r_max).astype(np.int64)
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """(n, d) i.i.d. jumps."""
        if self.d == 1:
            signs = np.where(rng.random(n) < 0.5, -1, 1)
            return (signs * self._radii_1d(rng, n))[:, None]
        return self.bands.sample_jumps(rng, n)


def discrete_reference_path(
    params: ModelParams,
    n: int,
    rng: np.random.Generator,
    r_max: Optional[int] = None,
    law: Optional[ReferenceJumpLaw] = None,
    ell: int = 0,
) -> WalkPath:
    """Partial sums of n reference jumps as a WalkPath (vertices are not tracked)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    law = law or ReferenceJumpLaw(params, r_max or default_window(n, params.alpha))
    jumps = law.sample(rng, n)
    positions = np.concatenate([np.zeros((1, params.d), dtype=np.int64), np.cumsum(jumps, axis=0)])
    _, first = np.unique(positions, axis=0, return_index=True)
    new = np.zeros(n + 1, dtype=bool)
    new[first] = True
    return WalkPath(
        start=0,
        positions=positions,
        vertices=np.full(n + 1, -1, dtype=np.int64),
        new=new,
        jumps=np.abs(jumps).max(axis=1),
        ell=ell,
    )


def reference_endpoints(
    params: ModelParams,
    n: int,
    paths: int,
    rng: np.random.Generator,
    r_max: Optional[int] = None,
    rescale: bool = True,
) -> np.ndarray:
    """(paths, d) endpoints of n-step reference sums, divided by n^{1/alpha} when ``rescale``."""
    law = ReferenceJumpLaw(params, r_max or default_window(n, params.alpha))
    out = np.zeros((paths, params.d), dtype=np.float64)
    per_chunk = max(1, CHUNK // n)
    for lo in range(0, paths, per_chunk):
        k = min(per_chunk, paths - lo)
        out[lo : lo + k] = law.sample(rng, k * n).reshape(k, n, params.d).sum(axis=1)
    if rescale:
        out /= float(n) ** (1.0 / params.alpha)
    return out


def total_jump_statistic(
    params: ModelParams, n: int, samples: int, rng: np.random.Generator, r_max: Optional[int] = None
) -> np.ndarray:
    """n^{-1/alpha} sum_{i <= n} sum_x |x| w_i(x) over ``samples`` independent runs.

    The w_i are independent Bernoulli fields with the pair law P(|x|) over the
    window 1 <= ||x||_inf <= r_max, nearest neighbours included.
    """
    if n < 1 or samples < 1:
        raise DomainError(f"n and samples must be >= 1, got {n}, {samples}")
    if not params.d < params.s < params.d + 1:
        raise DomainError(f"total-jump statistic needs d < s < d + 1, got s={params.s}, d={params.d}")
    bands = DisplacementBands(params, 0, r_max or default_window(n, params.alpha))
    return bands.field_norm_totals(rng, samples, steps=n) / float(n) ** (1.0 / params.alpha)
