"""Simple random walks on environment views.

Every walk ell draws its step uniforms from ``streams.generator(WALK, ell)``
in order, one uniform per step, and picks neighbour floor(u * deg) of the
sorted neighbour list. The lockstep ensemble and the single-walk loop consume
the same uniforms, so a path never depends on how walks are scheduled.
"""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..percolation.clusters import analyze_clusters
from ..percolation.generator import Environment
from ..utils.errors import DomainError
from ..utils.streams import StreamFactory, StreamRole
from .ball import GraphView
from .path import WalkPath, new_vertex_indicators

BLOCK = 1 << 14


def _uniform_blocks(rng: np.random.Generator, n: int):
    done = 0
    while done < n:
        size = min(BLOCK, n - done)
        yield rng.random(size)
        done += size


def _choose(u: np.ndarray, deg: np.ndarray) -> np.ndarray:
    return np.minimum((u * deg).astype(np.int64), deg - 1)


def assemble_path(view: GraphView, vertices: np.ndarray, ell: int = 0, stream=()) -> WalkPath:
    """Build a WalkPath from torus-reduced vertices, unwrapping each step."""
    lattice = view.lattice
    vertices = np.asarray(vertices, dtype=np.int64)
    steps = lattice.displacement(vertices[:-1], vertices[1:]).reshape(-1, lattice.d)
    start = lattice.coords(vertices[0]).reshape(1, lattice.d)
    positions = np.concatenate([start, start + np.cumsum(steps, axis=0)])
    jumps = np.abs(steps).max(axis=1) if steps.size else np.empty(0, dtype=np.int64)
    return WalkPath(
        start=int(vertices[0]),
        positions=positions,
        vertices=vertices,
        new=new_vertex_indicators(vertices),
        jumps=jumps,
        ell=ell,
        stream=tuple(stream),
    )


def run_walk(
    view: GraphView,
    start: int,
    n: int,
    streams: StreamFactory,
    ell: int = 0,
) -> WalkPath:
    """Simple random walk of exactly ``n`` steps.

    Args:
        view: Environment or exploration adapter exposing ``neighbors``
        start: Flat start vertex
        n: Number of steps
        streams: Master stream factory
        ell: Walk index selecting the stream

    Raises:
        DomainError: the start vertex is isolated
    """
    if n < 0:
        raise DomainError(f"step count must be >= 0, got {n}")
    if len(view.neighbors(start)) == 0:
        raise DomainError(f"start vertex {start} is isolated")
    rng = streams.generator(StreamRole.WALK, ell)
    vertices = np.empty(n + 1, dtype=np.int64)
    vertices[0] = v = start
    i = 0
    for block in _uniform_blocks(rng, n):
        for u in block:
            nbrs = view.neighbors(v)
            v = int(nbrs[min(int(u * len(nbrs)), len(nbrs) - 1)])
            i += 1
            vertices[i] = v
    return assemble_path(view, vertices, ell, (streams.seed, int(StreamRole.WALK), ell))


def _lockstep(env: Environment, start: int, n: int, streams: StreamFactory, ells: Sequence[int]) -> np.ndarray:
    indptr, indices, degrees = env.indptr, env.indices, env.degrees
    gens = [streams.generator(StreamRole.WALK, ell) for ell in ells]
    vertices = np.empty((len(ells), n + 1), dtype=np.int64)
    vertices[:, 0] = start
    cur = vertices[:, 0].copy()
    t = 0
    iters = [_uniform_blocks(g, n) for g in gens]
    while t < n:
        block = np.stack([next(it) for it in iters])
        for col in range(block.shape[1]):
            deg = degrees[cur]
            cur = indices[indptr[cur] + _choose(block[:, col], deg)]
            t += 1
            vertices[:, t] = cur
    return vertices


def run_ensemble(
    view: GraphView,
    start: int,
    n: int,
    count: int,
    streams: StreamFactory,
    first_ell: int = 0,
) -> List[WalkPath]:
    """``count`` conditionally independent walks; walk ell uses stream (seed, WALK, ell).

    Materialized environments advance all walks in lockstep over the CSR
    arrays; other views run walk by walk in index order.
    """
    if count < 1:
        raise DomainError(f"ensemble size must be >= 1, got {count}")
    ells = list(range(first_ell, first_ell + count))
    if not isinstance(view, Environment):
        return [run_walk(view, start, n, streams, ell) for ell in ells]
    if view.degree(start) == 0:
        raise DomainError(f"start vertex {start} is isolated")
    vertices = _lockstep(view, start, n, streams, ells)
    return [
        assemble_path(view, row, ell, (streams.seed, int(StreamRole.WALK), ell))
        for row, ell in zip(vertices, ells)
    ]


class IntersectionReport(BaseModel):
    """Pairwise vertex-set intersections of an ensemble."""

    pairs: int = Field(..., description="Number of walk pairs")
    mean: float = Field(..., description="Mean intersection count")
    max: int = Field(..., description="Largest intersection count")
    n_steps: int = Field(..., description="Walk length")

    def to_report(self) -> dict:
        return self.model_dump()


def intersection_counts(paths: Sequence[WalkPath]) -> IntersectionReport:
    """|V(X^l) cap V(X^l')| for every pair l < l' of torus vertices."""
    sets = [np.unique(p.vertices) for p in paths]
    counts = [
        int(np.intersect1d(sets[a], sets[b], assume_unique=True).size)
        for a in range(len(sets))
        for b in range(a + 1, len(sets))
    ]
    return IntersectionReport(
        pairs=len(counts),
        mean=float(np.mean(counts)) if counts else 0.0,
        max=max(counts) if counts else 0,
        n_steps=paths[0].n_steps if paths else 0,
    )


class OccupationReport(BaseModel):
    """Degree-biased stationarity diagnostic."""

    visits: int = Field(..., description="Counted visits after burn-in")
    support: int = Field(..., description="Vertices of the largest cluster")
    tv_distance: float = Field(..., description="TV distance to degree-proportional law")
    tv_noise: float = Field(..., description="TV scale expected from i.i.d. sampling noise")
    correlation: float = Field(..., description="Correlation of occupation and degree on visited vertices")

    def to_report(self) -> dict:
        return self.model_dump()


def stationary_distribution(env: Environment) -> np.ndarray:
    """Degree-proportional law restricted to the largest cluster."""
    mask = analyze_clusters(env).largest_mask
    weights = np.where(mask, env.degrees, 0).astype(np.float64)
    return weights / weights.sum()


def occupation_vs_degree(paths: Sequence[WalkPath], env: Environment, burn_in: int = 0) -> OccupationReport:
    """Compare long-run occupation frequencies with degree / total degree."""
    pi = stationary_distribution(env)
    visits = np.concatenate([p.vertices[burn_in + 1 :] for p in paths])
    if visits.size == 0:
        raise DomainError("no visits after burn-in")
    freq = np.bincount(visits, minlength=env.n_vertices) / visits.size
    tv = 0.5 * float(np.abs(freq - pi).sum())
    noise = 0.5 * float(np.sqrt(2.0 / np.pi) * np.sqrt(pi * (1 - pi) / visits.size).sum())
    seen = freq > 0
    if seen.sum() > 1 and np.std(env.degrees[seen]) > 0:
        corr = float(np.corrcoef(freq[seen], env.degrees[seen])[0, 1])
    else:
        corr = 0.0
    return OccupationReport(
        visits=int(visits.size),
        support=int((pi > 0).sum()),
        tv_distance=tv,
        tv_noise=noise,
        correlation=corr,
    )


def wraparound_fraction(paths: Sequence[WalkPath], L: int, threshold: float = 0.25) -> float:
    """Fraction of walks whose max displacement reaches threshold * L."""
    if not paths:
        return 0.0
    return float(np.mean([p.max_displacement() >= threshold * L for p in paths]))


def endpoint_displacements(paths: Sequence[WalkPath], n: Optional[int] = None) -> np.ndarray:
    """(count, d) array of X_n - X_0."""
    return np.stack([p.displacement()[p.n_steps if n is None else n] for p in paths])
