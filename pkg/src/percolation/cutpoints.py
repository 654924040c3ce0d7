"""Cutpoints of one-dimensional environments."""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.errors import DomainError, UnsupportedDimensionError
from .generator import Environment


class CutpointSet(BaseModel):
    """Sorted cutpoint coordinates of a d=1 environment."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    positions: np.ndarray = Field(..., description="Sorted cutpoint coordinates")
    length: int = Field(..., description="Window length L")

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.positions)

    @property
    def count(self) -> int:
        return int(self.positions.size)

    def density(self) -> float:
        return self.count / float(self.length)

    def contains(self, x: int) -> bool:
        i = np.searchsorted(self.positions, x)
        return bool(i < self.positions.size and self.positions[i] == x)


def long_edge_spans(env: Environment) -> Tuple[np.ndarray, np.ndarray]:
    """Covered intervals [a, b] of the unwrapped window, one per long edge.

    A torus edge whose shortest path crosses the seam covers [b, L-1] and [0, a].
    """
    a, b = env.long_src, env.long_dst
    L = env.params.L
    if not env.lattice.is_torus or a.size == 0:
        return a, b
    wraps = env.lattice.wrap(b - a) != (b - a)
    left = np.concatenate([a[~wraps], b[wraps], np.zeros(int(wraps.sum()), dtype=np.int64)])
    right = np.concatenate([b[~wraps], np.full(int(wraps.sum()), L - 1), a[wraps]])
    return left, right


def detect_cutpoints(env: Environment) -> CutpointSet:
    """Cutpoints via a max-right-endpoint scan line.

    x is a cutpoint iff no long edge {a, b} has a <= x <= b; endpoints of a
    spanned interval are excluded.

    Raises:
        UnsupportedDimensionError: d != 1
        DomainError: nearest-neighbour edges are not forced
    """
    if env.params.d != 1:
        raise UnsupportedDimensionError(f"cutpoints need d=1, got d={env.params.d}")
    if not env.params.nn_prob_one:
        raise DomainError("cutpoints are defined for environments with P(1)=1")
    L = env.params.L
    left, right = long_edge_spans(env)
    reach = np.full(L, -1, dtype=np.int64)
    if left.size:
        np.maximum.at(reach, left, right)
    running = np.maximum.accumulate(reach)
    covered = running >= np.arange(L)
    return CutpointSet(positions=np.flatnonzero(~covered).astype(np.int64), length=L)


def cutpoint_density(env: Environment, windows: int = 10) -> np.ndarray:
    """Cutpoint density in ``windows`` disjoint equal windows of [0, L)."""
    cut = detect_cutpoints(env)
    edges = np.linspace(0, env.params.L, windows + 1).astype(np.int64)
    counts = np.histogram(cut.positions, bins=edges)[0]
    return counts / np.diff(edges).astype(np.float64)
