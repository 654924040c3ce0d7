"""Walk paths, rescaled step functions and L^q distances between them."""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.errors import DomainError


class PathNorm(str, Enum):
    SUP = "inf"
    EUCLIDEAN = "2"


class Interpolation(str, Enum):
    STEP = "step"
    LINEAR = "linear"


def new_vertex_indicators(vertices: np.ndarray) -> np.ndarray:
    """N_i = 1 iff vertices[i] does not occur among vertices[:i]."""
    vertices = np.asarray(vertices)
    new = np.zeros(vertices.size, dtype=bool)
    if vertices.size:
        _, first = np.unique(vertices, return_index=True)
        new[first] = True
    return new


class WalkPath(BaseModel):
    """Trajectory of one walk.

    ``positions`` are unwrapped lattice coordinates starting at the start
    vertex's coordinates; ``vertices`` are the torus-reduced flat indices.
    ``jumps[i]`` is the sup-norm length of step i -> i + 1.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    start: int = Field(..., description="Flat index of the start vertex")
    positions: np.ndarray = Field(..., description="(n+1, d) unwrapped coordinates")
    vertices: np.ndarray = Field(..., description="(n+1,) flat vertex indices")
    new: np.ndarray = Field(..., description="(n+1,) new-vertex indicators")
    jumps: np.ndarray = Field(..., description="(n,) sup-norm step lengths")
    ell: int = Field(default=0, description="Walk index in its ensemble")
    stream: Tuple[int, ...] = Field(default=(), description="Stream key of the walk")

    @property
    def n_steps(self) -> int:
        return int(self.jumps.size)

    @property
    def d(self) -> int:
        return int(self.positions.shape[1])

    def displacement(self) -> np.ndarray:
        """X_i - X_0 for every i."""
        return self.positions - self.positions[0]

    def max_displacement(self) -> int:
        return int(np.abs(self.displacement()).max()) if self.n_steps else 0

    def range_size(self, upto: Optional[int] = None) -> int:
        end = self.n_steps if upto is None else upto
        return int(self.new[: end + 1].sum())


class StepFunction(BaseModel):
    """Rescaled path on [0, 1].

    ``step`` mode is t -> v_floor(nt) (right-continuous); ``linear`` mode
    interpolates between grid values.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=1, description="Number of grid cells")
    a: float = Field(..., description="Rescaling exponent")
    values: np.ndarray = Field(..., description="(n+1, d) grid values")
    mode: Interpolation = Field(default=Interpolation.STEP, description="step | linear")

    def breakpoints(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=np.float64) / self.n

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
        pos = t * self.n
        i = np.minimum(np.floor(pos).astype(np.int64), self.n)
        if self.mode == Interpolation.STEP:
            return self.values[i]
        j = np.minimum(i + 1, self.n)
        frac = (pos - i)[..., None]
        return self.values[i] + frac * (self.values[j] - self.values[i])


def rescale_path(
    path: WalkPath,
    a: float,
    mode: Interpolation = Interpolation.STEP,
    n: Optional[int] = None,
) -> StepFunction:
    """t -> n^{-a} (X_floor(nt) - X_0).

    Args:
        path: Walk to rescale
        a: Exponent, 1/alpha in the stable regime and 1/2 for the Brownian check
        mode: Step function or linear interpolation
        n: Time scale; defaults to the path length

    Raises:
        DomainError: a <= 0 or the path has no steps
    """
    if a <= 0:
        raise DomainError(f"rescaling exponent must be positive, got {a}")
    n = path.n_steps if n is None else int(n)
    if n < 1 or n > path.n_steps:
        raise DomainError(f"time scale n={n} outside [1, {path.n_steps}]")
    values = path.displacement()[: n + 1].astype(np.float64) * float(n) ** (-a)
    return StepFunction(n=n, a=a, values=values, mode=mode)


def _magnitude(diff: np.ndarray, norm: PathNorm) -> np.ndarray:
    if norm == PathNorm.SUP:
        return np.abs(diff).max(axis=-1)
    return np.sqrt((diff**2).sum(axis=-1))


def _linear_power_integral(h0: np.ndarray, h1: np.ndarray, width: np.ndarray, q: float) -> np.ndarray:
    """Exact integral of |h|^q for h linear from h0 to h1 over ``width``."""
    a0, a1 = np.abs(h0), np.abs(h1)
    out = np.empty_like(a0)
    crossing = h0 * h1 < 0
    flat = ~crossing & np.isclose(a0, a1, rtol=0.0, atol=1e-15)
    same = ~crossing & ~flat
    out[flat] = a0[flat] ** q
    out[same] = (a1[same] ** (q + 1) - a0[same] ** (q + 1)) / ((q + 1) * (a1[same] - a0[same]))
    out[crossing] = (a0[crossing] ** (q + 1) + a1[crossing] ** (q + 1)) / (
        (q + 1) * (a0[crossing] + a1[crossing])
    )
    return out * width


def _cell_ends(fn: StepFunction, left: np.ndarray, right: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values at the left end and left limit at the right end of each cell."""
    if fn.mode == Interpolation.STEP:
        inside = fn(0.5 * (left + right))
        return inside, inside
    return fn(left), fn(right)


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


def lq_distance(f: StepFunction, g: StepFunction, q: float = 2.0, norm: PathNorm = PathNorm.SUP) -> float:
    """(int_0^1 |f - g|^q dt)^{1/q} on the merged breakpoint grid.

    Step functions are integrated exactly. Linear interpolants are exact in
    d = 1; for d > 1 each merged cell is integrated by 8-point Gauss-Legendre
    on 16 sub-cells.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    if f.values.shape[1] != g.values.shape[1]:
        raise DomainError("step functions have different dimensions")
    grid = np.union1d(f.breakpoints(), g.breakpoints())
    left, right = grid[:-1], grid[1:]
    width = right - left
    if f.mode == Interpolation.STEP and g.mode == Interpolation.STEP:
        mid = 0.5 * (left + right)
        mag = _magnitude(f(mid) - g(mid), norm)
        total = float((mag**q * width).sum())
    elif f.values.shape[1] == 1:
        f0, f1 = _cell_ends(f, left, right)
        g0, g1 = _cell_ends(g, left, right)
        h0, h1 = (f0 - g0)[:, 0], (f1 - g1)[:, 0]
        total = float(_linear_power_integral(h0, h1, width, q).sum())
    else:
        sub = 16
        edges = left[:, None] + width[:, None] * np.linspace(0.0, 1.0, sub + 1)[None, :]
        a_, b_ = edges[:, :-1].ravel(), edges[:, 1:].ravel()
        half = 0.5 * (b_ - a_)
        nodes = (0.5 * (a_ + b_))[:, None] + half[:, None] * _GAUSS_NODES[None, :]
        mag = _magnitude(f(nodes) - g(nodes), norm)
        total = float(((mag**q) * _GAUSS_WEIGHTS[None, :] * half[:, None]).sum())
    return total ** (1.0 / q)
