"""Model parameters, the edge law and lattice geometry."""

from enum import Enum
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..utils.errors import DomainError

Number = Union[float, np.ndarray]


class Norm(str, Enum):
    EUCLIDEAN = "2"
    SUP = "inf"


class Boundary(str, Enum):
    TORUS = "torus"
    FREE = "free"


class ModelParams(BaseModel):
    """Parameters of a finite long-range percolation environment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    d: int = Field(..., ge=1, description="Dimension")
    s: float = Field(..., description="Tail exponent, s > d")
    beta: float = Field(default=1.0, ge=0.0, description="Rate constant of the edge law")
    nn_prob_one: bool = Field(default=True, description="Force nearest-neighbour edges")
    L: int = Field(..., ge=4, description="Side length of the box")
    boundary: Boundary = Field(default=Boundary.TORUS, description="torus | free")
    norm: Norm = Field(default=Norm.EUCLIDEAN, description="Norm used by the edge law")

    @model_validator(mode="after")
    def _check_tail(self) -> "ModelParams":
        if not self.s > self.d:
            raise ValueError(f"s must exceed d (got s={self.s}, d={self.d})")
        return self

    @property
    def alpha(self) -> float:
        return self.s - self.d

    @property
    def n_vertices(self) -> int:
        return self.L**self.d

    @property
    def tail_constant(self) -> float:
        """Constant C in P(r) ~ C r^{-s}; equals beta for the exponential law."""
        return self.beta

    def header_fields(self) -> dict:
        return {
            "d": self.d,
            "s": self.s,
            "beta": self.beta,
            "L": self.L,
            "nn": int(self.nn_prob_one),
            "norm": self.norm.value,
            "boundary": self.boundary.value,
        }


def long_edge_probability(r: Number, params: ModelParams) -> Number:
    """1 - exp(-beta r^-s) without the nearest-neighbour override."""
    r = np.asarray(r, dtype=np.float64)
    out = -np.expm1(-params.beta * np.power(r, -params.s))
    return float(out) if out.ndim == 0 else out


def connection_probability(r: Number, params: ModelParams) -> Number:
    """Edge probability at distance ``r``.

    Args:
        r: Distance (scalar or array), must be >= 1
        params: Model parameters

    Returns:
        1 when r == 1 and nearest-neighbour edges are forced, else
        1 - exp(-beta r^-s)
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(~np.isfinite(r_arr)) or np.any(r_arr < 1):
        raise DomainError(f"distance must be >= 1, got {r!r}")
    p = np.asarray(long_edge_probability(r_arr, params), dtype=np.float64)
    if params.nn_prob_one:
        p = np.where(r_arr == 1.0, 1.0, p)
    return float(p) if p.ndim == 0 else p


def displacement_norm(z: np.ndarray, norm: Norm) -> np.ndarray:
    """Norm of integer displacement vectors along the last axis."""
    z = np.asarray(z)
    if norm == Norm.SUP:
        return np.abs(z).max(axis=-1).astype(np.float64)
    return np.sqrt((z.astype(np.float64) ** 2).sum(axis=-1))


def pair_probability(z: np.ndarray, params: ModelParams) -> np.ndarray:
    """Edge probability for displacement vectors ``z`` (shape (..., d)).

    Lattice nearest neighbours use P(1); every other pair is a long pair and
    follows the exponential law at its configured norm.
    """
    z = np.asarray(z)
    l1 = np.abs(z).sum(axis=-1)
    if np.any(l1 == 0):
        raise DomainError("zero displacement has no edge probability")
    p_long = np.asarray(long_edge_probability(displacement_norm(z, params.norm), params))
    p_nn = 1.0 if params.nn_prob_one else float(long_edge_probability(1.0, params))
    return np.where(l1 == 1, p_nn, p_long)


def torus_box(L: int) -> Tuple[int, int]:
    """Coordinate range of canonical torus displacements, (-L/2, L/2]."""
    return -((L - 1) // 2), L // 2


class Lattice:
    """Flat-index geometry of the box [0, L)^d."""

    def __init__(self, d: int, L: int, boundary: Boundary = Boundary.TORUS):
        self.d = d
        self.L = L
        self.boundary = boundary
        self.n = L**d
        self.lo, self.hi = torus_box(L)
        self._strides = np.array([L ** (d - 1 - k) for k in range(d)], dtype=np.int64)

    @classmethod
    def from_params(cls, params: ModelParams) -> "Lattice":
        return cls(params.d, params.L, params.boundary)

    @property
    def is_torus(self) -> bool:
        return self.boundary == Boundary.TORUS

    def coords(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.int64)
        return (flat[..., None] // self._strides) % self.L

    def flat(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        return (np.mod(coords, self.L) * self._strides).sum(axis=-1)

    def inside(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords)
        return np.all((coords >= 0) & (coords < self.L), axis=-1)

    def wrap(self, diff: np.ndarray) -> np.ndarray:
        """Reduce coordinate differences to the canonical torus box."""
        diff = np.asarray(diff, dtype=np.int64)
        if not self.is_torus:
            return diff
        return np.mod(diff - self.lo, self.L) + self.lo

    def displacement(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Displacement from flat vertex u to flat vertex v."""
        return self.wrap(self.coords(v) - self.coords(u))

    def sup_distance(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.abs(self.displacement(u, v)).max(axis=-1)

    def shift(self, u: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Flat index of u + z and a validity mask (free boundary drops exits)."""
        target = self.coords(u) + np.asarray(z, dtype=np.int64)
        valid = np.ones(target.shape[:-1], dtype=bool)
        if not self.is_torus:
            valid = self.inside(target)
        return self.flat(target), valid

    def box_displacements(self, radius: int) -> np.ndarray:
        """All z != 0 with ||z||_inf <= radius, clipped to the torus box."""
        lo = max(-radius, self.lo) if self.is_torus else -radius
        hi = min(radius, self.hi) if self.is_torus else radius
        axes = [np.arange(lo, hi + 1, dtype=np.int64)] * self.d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.d)
        return grid[np.abs(grid).sum(axis=1) > 0]

    def unit_vectors(self) -> np.ndarray:
        return np.eye(self.d, dtype=np.int64)


def expected_degree(params: ModelParams) -> float:
    """Mean degree of a torus vertex: sum of P over all other vertices."""
    lattice = Lattice(params.d, params.L, Boundary.TORUS)
    if params.d == 1:
        z = np.arange(lattice.lo, lattice.hi + 1, dtype=np.int64)
        z = z[z != 0][:, None]
        return float(pair_probability(z, params).sum())
    total = 0.0
    axis = np.arange(lattice.lo, lattice.hi + 1, dtype=np.int64)
    rest = np.stack(np.meshgrid(*([axis] * (params.d - 1)), indexing="ij"), axis=-1)
    rest = rest.reshape(-1, params.d - 1)
    for first in axis:
        z = np.concatenate([np.full((rest.shape[0], 1), first), rest], axis=1)
        z = z[np.abs(z).sum(axis=1) > 0]
        total += float(pair_probability(z, params).sum())
    return total


def expected_long_edge_count(params: ModelParams) -> float:
    """Expected number of long edges on the torus."""
    nn_mass = 2 * params.d * (1.0 if params.nn_prob_one else float(long_edge_probability(1.0, params)))
    return 0.5 * params.n_vertices * (expected_degree(params) - nn_mass)
