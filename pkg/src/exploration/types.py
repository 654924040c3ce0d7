"""New-vertex types (j, m): q-grid construction and binning."""

from enum import IntEnum
from typing import Sequence, Tuple

import numpy as np

from ..utils.errors import AtomCollisionError, DomainError

JITTER = 1e-6
ATOM_MASS = 0.01


class Phase(IntEnum):
    MAIN = 0
    SPECIAL = 1


def estimate_q_grid(p_samples: np.ndarray, J: int, jitter: float = JITTER) -> np.ndarray:
    """Quantiles of the p~ sample at j/(J+1), j = 1..J, nudged off atoms.

    Raises:
        AtomCollisionError: more than 1% of the sample sits exactly on a grid point
    """
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    p_samples = np.asarray(p_samples, dtype=np.float64)
    if p_samples.size == 0:
        raise DomainError("cannot build a q-grid from an empty sample")
    levels = np.arange(1, J + 1) / (J + 1)
    q = np.quantile(p_samples, levels) + jitter
    for i in range(1, q.size):
        if q[i] <= q[i - 1]:
            q[i] = np.nextafter(q[i - 1], np.inf)
    q = np.clip(q, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    check_atoms(p_samples, q)
    return q


def check_atoms(p_samples: np.ndarray, q_grid: Sequence[float]) -> None:
    p_samples = np.asarray(p_samples)
    for q in q_grid:
        mass = float(np.mean(p_samples == q))
        if mass > ATOM_MASS:
            raise AtomCollisionError(float(q), mass)


def validate_q_grid(q_grid: Sequence[float]) -> np.ndarray:
    q = np.asarray(q_grid, dtype=np.float64)
    if q.size == 0:
        raise DomainError("q-grid is empty")
    if np.any(np.diff(q) <= 0) or q[0] <= 0 or q[-1] >= 1:
        raise DomainError("q-grid must satisfy 0 < q_1 < ... < q_J < 1")
    return q


def type_bin(p: float, d: int, q_grid: np.ndarray) -> Tuple[int, int]:
    """(j, m) with j = min{j >= 1 : q_j > p} and m = d, or the overflow bin (0, 0)."""
    J = len(q_grid)
    if p >= q_grid[-1] or not 1 <= d <= J:
        return 0, 0
    return int(np.searchsorted(q_grid, p, side="right")) + 1, int(d)


def type_bins(p: np.ndarray, d: np.ndarray, q_grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized ``type_bin``."""
    p = np.asarray(p, dtype=np.float64)
    d = np.asarray(d, dtype=np.int64)
    J = len(q_grid)
    ok = (p < q_grid[-1]) & (d >= 1) & (d <= J)
    j = np.where(ok, np.searchsorted(q_grid, p, side="right") + 1, 0)
    m = np.where(ok, d, 0)
    return j.astype(np.int64), m.astype(np.int64)


def bin_edges(q_grid: np.ndarray) -> np.ndarray:
    """(q_0 = 0, q_1, ..., q_J)."""
    return np.concatenate([[0.0], np.asarray(q_grid, dtype=np.float64)])


def psi(q_grid: np.ndarray) -> float:
    """max_j (1/(1 - q_j) - 1/(1 - q_{j-1})), the bracket width of K_J."""
    edges = bin_edges(q_grid)
    return float(np.max(1.0 / (1.0 - edges[1:]) - 1.0 / (1.0 - edges[:-1])))
