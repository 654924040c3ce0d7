"""Revealed-environment bookkeeping of the exploration process.

Pairs within sup-distance ``near_radius`` of each other are decided by the
per-edge keyed uniform, exactly as the ``hash`` generator decides them, so
they need no storage and every ball is a pure function of the seed. Pairs
further apart are far pairs: they are decided once, when the first of their
endpoints is fully revealed, and stored in the registry.
"""

from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from ..percolation.bands import DisplacementBands
from ..percolation.generator import edge_uniform
from ..percolation.model import Lattice, ModelParams, pair_probability
from ..utils.errors import DomainError
from ..utils.streams import StreamFactory, StreamRole
from ..walks.ball import EXACT_MAX_STATES, LocalBall
from .scales import Scales
from .types import type_bin

SAMPLERS = ("auto", "hash", "skip")
AUTO_HASH_MAX_VERTICES = 4096
VIEW_STREAM = 1 << 30


class NearField:
    """Graph view restricted to near pairs; never triggers a reveal."""

    def __init__(self, state: "ExplorationState"):
        self.state = state
        self.lattice = state.lattice

    def neighbors(self, v: int) -> np.ndarray:
        return self.state.near_neighbors(v)


class ExplorationState:
    """Registry of revealed edges, the sets W and W+, and local types.

    Args:
        params: Model parameters
        seed: Master seed shared with percolation-core
        scales: Exploration scales
        q_grid: Type grid q_1 < ... < q_J (may be set later)
        sampler: Far-pair sampler, ``hash`` (exact) or ``skip`` (bands)
        local_trials: Monte Carlo trials when a ball exceeds the exact limit
    """

    def __init__(
        self,
        params: ModelParams,
        seed: int,
        scales: Scales,
        q_grid: Optional[np.ndarray] = None,
        sampler: str = "auto",
        local_trials: int = 2000,
    ):
        if sampler not in SAMPLERS:
            raise DomainError(f"unknown far-edge sampler {sampler!r}")
        self.params = params
        self.seed = int(seed)
        self.scales = scales
        self.lattice = Lattice.from_params(params)
        self.q_grid = None if q_grid is None else np.asarray(q_grid, dtype=np.float64)
        if sampler == "auto":
            sampler = "hash" if self.lattice.n <= AUTO_HASH_MAX_VERTICES else "skip"
        self.sampler = sampler
        self.local_trials = local_trials
        self.streams = StreamFactory(seed)

        self.registry: Dict[int, Set[int]] = {}
        self.revealed: Set[int] = set()
        self.visited: Set[int] = set()
        self._revealed_coords: List[np.ndarray] = []
        self._revealed_stack: Optional[np.ndarray] = None
        self._revealed_flat = np.empty(0, dtype=np.int64)
        self._near_cache: Dict[int, np.ndarray] = {}
        self._local_cache: Dict[int, Tuple[float, int]] = {}
        self.near_field = NearField(self)

        near = scales.near_radius
        self._near_z = self.lattice.box_displacements(near)
        self._near_p = pair_probability(self._near_z, params)
        self._far_z: Optional[np.ndarray] = None
        self._far_p: Optional[np.ndarray] = None
        self._bands: Optional[DisplacementBands] = None

    # -- edges -------------------------------------------------------------

    def near_neighbors(self, v: int) -> np.ndarray:
        """Neighbours of v within sup-distance near_radius (pure function of the seed)."""
        cached = self._near_cache.get(v)
        if cached is not None:
            return cached
        targets, valid = self.lattice.shift(np.full(self._near_z.shape[0], v), self._near_z)
        hit = valid & (edge_uniform(self.seed, v, targets) < self._near_p)
        out = np.unique(targets[hit])
        self._near_cache[v] = out
        return out

    def known_neighbors(self, v: int) -> np.ndarray:
        """Near neighbours plus far neighbours already in the registry."""
        far = self.registry.get(v)
        near = self.near_neighbors(v)
        if not far:
            return near
        return np.union1d(near, np.fromiter(far, dtype=np.int64))

    def neighbors(self, v: int) -> np.ndarray:
        """All neighbours of v; v must be fully revealed."""
        if v not in self.revealed:
            raise DomainError(f"vertex {v} has not been revealed")
        return self.known_neighbors(v)

    def degree(self, v: int) -> int:
        return int(self.neighbors(v).size)

    def sup_distance(self, u: int, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        return self.lattice.sup_distance(np.full(v.shape, u), v)

    def long_neighbors(self, v: int, known_only: bool = False) -> np.ndarray:
        """Neighbours at sup-distance > rho."""
        nbrs = self.known_neighbors(v) if known_only else self.neighbors(v)
        if nbrs.size == 0:
            return nbrs
        return nbrs[self.sup_distance(v, nbrs) > self.scales.rho]

    def has_long_edge(self, v: int, known_only: bool = False) -> bool:
        return bool(self.long_neighbors(v, known_only).size)

    def _register(self, a: int, b: int) -> None:
        self.registry.setdefault(a, set()).add(b)
        self.registry.setdefault(b, set()).add(a)

    def _far_candidates_hash(self, v: int) -> np.ndarray:
        if self._far_z is None:
            lattice = self.lattice
            axis = np.arange(lattice.lo, lattice.hi + 1) if lattice.is_torus else np.arange(-(lattice.L - 1), lattice.L)
            grid = np.stack(np.meshgrid(*([axis] * lattice.d), indexing="ij"), axis=-1).reshape(-1, lattice.d)
            far = grid[np.abs(grid).max(axis=1) > self.scales.near_radius]
            self._far_z = far
            self._far_p = pair_probability(far, self.params) if far.size else np.empty(0)
        if self._far_z.size == 0:
            return np.empty(0, dtype=np.int64)
        targets, valid = self.lattice.shift(np.full(self._far_z.shape[0], v), self._far_z)
        hit = valid & (edge_uniform(self.seed, v, targets) < self._far_p)
        return targets[hit]

    def _far_candidates_skip(self, v: int, rng: np.random.Generator) -> np.ndarray:
        if self._bands is None:
            lattice = self.lattice
            box = (lattice.lo, lattice.hi) if lattice.is_torus else (-(lattice.L - 1), lattice.L - 1)
            reach = max(-box[0], box[1])
            self._bands = DisplacementBands(self.params, self.scales.near_radius, reach, box=box)
        if not self._bands.bands:
            return np.empty(0, dtype=np.int64)
        z = self._bands.sample_field(rng)
        if z.size == 0:
            return np.empty(0, dtype=np.int64)
        targets, valid = self.lattice.shift(np.full(z.shape[0], v), z)
        return targets[valid]

    def reveal(self, v: int, rng: Optional[np.random.Generator] = None) -> List[int]:
        """Fully reveal v: decide every undecided far pair {v, x}.

        Far pairs whose other endpoint is already revealed were decided at that
        reveal and are taken from the registry. Returns the new far neighbours.
        """
        if v in self.revealed:
            return []
        if self.sampler == "hash":
            candidates = self._far_candidates_hash(v)
        else:
            if rng is None:
                rng = self.streams.generator(StreamRole.SPECIAL_FAR_EDGES, VIEW_STREAM, v)
            candidates = self._far_candidates_skip(v, rng)
        found = []
        for x in np.unique(candidates).tolist():
            if x == v or x in self.revealed:
                continue
            self._register(v, x)
            found.append(x)
        self.revealed.add(v)
        self._revealed_coords.append(self.lattice.coords(v))
        self._revealed_stack = None
        return found

    # -- geometry of W+ ----------------------------------------------------

    def distance_to_revealed(self, x: int, exclude: Iterable[int] = ()) -> float:
        """Sup-distance from x to the nearest fully revealed vertex not in ``exclude``."""
        if self._revealed_stack is None:
            self._revealed_stack = np.array(self._revealed_coords, dtype=np.int64).reshape(-1, self.lattice.d)
            self._revealed_flat = self.lattice.flat(self._revealed_stack)
        if self._revealed_stack.shape[0] == 0:
            return np.inf
        keep = ~np.isin(self._revealed_flat, np.fromiter(exclude, dtype=np.int64))
        if not keep.any():
            return np.inf
        diff = self.lattice.wrap(self._revealed_stack[keep] - self.lattice.coords(x))
        return float(np.abs(diff).max(axis=1).min())

    # -- local types -------------------------------------------------------

    def local_ball(self, v: int) -> LocalBall:
        return LocalBall.from_view(self.near_field, v, self.scales.ball_radius, cap=self.scales.cap)

    def local_quantities(self, v: int) -> Tuple[float, int]:
        """(p~_v, d~_v) on the ball V_v; exact when the ball is small enough."""
        cached = self._local_cache.get(v)
        if cached is not None:
            return cached
        ball = self.local_ball(v)
        if ball.size <= EXACT_MAX_STATES:
            est = ball.return_probability_exact()
        else:
            est = ball.return_probability_mc(self.streams.generator(StreamRole.MONTE_CARLO, v), self.local_trials)
        out = (est.p, est.degree)
        self._local_cache[v] = out
        return out

    def type_of(self, v: int) -> Tuple[int, int]:
        if self.q_grid is None:
            raise DomainError("q-grid has not been set")
        p, d = self.local_quantities(v)
        return type_bin(p, d, self.q_grid)

    def pilot_types(self, samples: int) -> Tuple[np.ndarray, np.ndarray]:
        """(p~, d~) at ``samples`` keyed random vertices, for the q-grid and type pool."""
        rng = self.streams.generator(StreamRole.TYPE, 0)
        vertices = rng.integers(0, self.lattice.n, size=samples)
        pairs = [self.local_quantities(int(v)) for v in vertices]
        return np.array([p for p, _ in pairs]), np.array([d for _, d in pairs], dtype=np.int64)

    def to_report(self) -> dict:
        return {
            "revealed": len(self.revealed),
            "visited": len(self.visited),
            "far_edges": sum(len(s) for s in self.registry.values()) // 2,
            "sampler": self.sampler,
        }


class ExplorationView:
    """Walkable view over an exploration state; reveals vertices on demand."""

    def __init__(self, state: ExplorationState):
        self.state = state
        self.lattice = state.lattice

    def neighbors(self, v: int) -> np.ndarray:
        self.state.reveal(v)
        return self.state.neighbors(v)
