"""Local balls: small subgraphs around a vertex with exact and Monte Carlo
return probabilities.

A ball is the subgraph induced on the vertices within sup-distance ``radius``
of its root. The walk on the ball moves to uniform ball neighbours; optional
exit vertices absorb it. The local return probability p~ is the chance that,
after a uniform first step to a ball neighbour, the walk is back at the root
within ``cap`` further steps (cap None means ever).
"""

from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field
from scipy.sparse.linalg import spsolve

from ..utils.errors import DomainError, ModelViolationError
from ..utils.stats import wilson_interval

EXACT_MAX_STATES = 2000


class GraphView(Protocol):
    """Anything a walk can run on: a lattice plus neighbour lists."""

    lattice: "object"

    def neighbors(self, v: int) -> np.ndarray: ...


def hitting_probability(P: sp.spmatrix, target: Sequence[int], absorbing: Sequence[int] = ()) -> np.ndarray:
    """Probability of reaching ``target`` before ``absorbing`` from every state.

    Solves (P - I) h = -P[:, target] 1 on the remaining states; states that
    cannot reach the target get 0.
    """
    P = sp.csr_matrix(P)
    n = P.shape[0]
    target = np.asarray(target, dtype=np.int64)
    absorbing = np.asarray(absorbing, dtype=np.int64)
    h = np.zeros(n)
    h[target] = 1.0
    origin = np.setdiff1d(np.arange(n), np.concatenate([target, absorbing]))
    if origin.size == 0:
        return h
    # restrict to states that can reach the target, otherwise the system is singular
    reach = _can_reach(P, target, absorbing)
    origin = origin[reach[origin]]
    if origin.size == 0:
        return h
    A = P[origin][:, origin] - sp.identity(origin.size, format="csr")
    b = -np.asarray(P[origin][:, target].sum(axis=1)).ravel()
    h[origin] = np.atleast_1d(spsolve(A.tocsc(), b))
    return np.clip(h, 0.0, 1.0)


def _can_reach(P: sp.csr_matrix, target: np.ndarray, absorbing: np.ndarray) -> np.ndarray:
    reverse = P.T.tocsr()
    blocked = np.zeros(P.shape[0], dtype=bool)
    blocked[absorbing] = True
    seen = np.zeros(P.shape[0], dtype=bool)
    seen[target] = True
    frontier = list(target)
    while frontier:
        u = frontier.pop()
        for w in reverse.indices[reverse.indptr[u] : reverse.indptr[u + 1]]:
            if not seen[w] and not blocked[w]:
                seen[w] = True
                frontier.append(w)
    return seen


class ReturnEstimate(BaseModel):
    """Local return probability with the ball degree of the root."""

    p: float = Field(..., description="Return probability p~ (1 by convention if isolated)")
    degree: int = Field(..., description="Number of ball neighbours of the root")
    mode: str = Field(..., description="exact | monte-carlo")
    ci_low: Optional[float] = Field(default=None, description="Wilson lower bound")
    ci_high: Optional[float] = Field(default=None, description="Wilson upper bound")
    trials: int = Field(default=0, description="Monte Carlo trials")
    isolated: bool = Field(default=False, description="Root had no ball neighbour")

    @property
    def ci_width(self) -> float:
        if self.ci_low is None or self.ci_high is None:
            return 0.0
        return self.ci_high - self.ci_low


class LocalBall:
    """Ball subgraph in local indices; local 0 is the root.

    Args:
        indptr, indices: CSR adjacency of the ball subgraph
        to_global: Global vertex of each local index
        exits: Local indices that absorb the walk
        cap: Step cap after the first step (None for no cap)
    """

    def __init__(
        self,
        indptr: np.ndarray,
        indices: np.ndarray,
        to_global: Optional[np.ndarray] = None,
        exits: Iterable[int] = (),
        cap: Optional[int] = None,
    ):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.size = self.indptr.size - 1
        self.to_global = (
            np.arange(self.size, dtype=np.int64) if to_global is None else np.asarray(to_global)
        )
        self.exit_mask = np.zeros(self.size, dtype=bool)
        self.exit_mask[list(exits)] = True
        if self.exit_mask[0]:
            raise DomainError("the root cannot be an exit")
        if cap is not None and cap < 0:
            raise DomainError(f"cap must be >= 0, got {cap}")
        self.cap = cap
        self.degrees = np.diff(self.indptr)
        self._global_index: Optional[Dict[int, int]] = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Sequence[Tuple[int, int]],
        exits: Iterable[int] = (),
        cap: Optional[int] = None,
    ) -> "LocalBall":
        """Fixture constructor: undirected edge list on local vertices 0..n-1."""
        adjacency: List[set] = [set() for _ in range(n)]
        for a, b in edges:
            if a == b:
                raise DomainError("self-loops are not allowed")
            adjacency[a].add(b)
            adjacency[b].add(a)
        indptr = np.concatenate([[0], np.cumsum([len(s) for s in adjacency])])
        indices = np.array([w for s in adjacency for w in sorted(s)], dtype=np.int64)
        return cls(indptr, indices, exits=exits, cap=cap)

    @classmethod
    def from_view(
        cls,
        view: GraphView,
        root: int,
        radius: int,
        cap: Optional[int] = None,
        absorb_boundary: bool = False,
    ) -> "LocalBall":
        """Ball of sup-radius ``radius`` around ``root`` in an environment view.

        With ``absorb_boundary`` every ball vertex other than the root that has
        a neighbour outside the ball is an exit.
        """
        lattice = view.lattice
        z = lattice.box_displacements(radius)
        others, valid = lattice.shift(np.full(z.shape[0], root), z)
        others = np.unique(others[valid & (others != root)])
        members = np.concatenate([[root], others]).astype(np.int64)
        local = {int(g): i for i, g in enumerate(members)}
        rows: List[np.ndarray] = []
        boundary = np.zeros(members.size, dtype=bool)
        for g in members:
            nbrs = np.asarray(view.neighbors(int(g)), dtype=np.int64)
            inside = np.array([int(w) in local for w in nbrs], dtype=bool)
            rows.append(np.sort(np.array([local[int(w)] for w in nbrs[inside]], dtype=np.int64)))
            boundary[local[int(g)]] = not inside.all() if nbrs.size else False
        indptr = np.concatenate([[0], np.cumsum([r.size for r in rows])])
        indices = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        exits = np.flatnonzero(boundary[1:]) + 1
        ball = cls(indptr, indices, members, exits=exits if absorb_boundary else (), cap=cap)
        ball._global_index = local
        return ball

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    @property
    def root_degree(self) -> int:
        return int(self.degrees[0])

    def local_index(self, g: int) -> Optional[int]:
        if self._global_index is None:
            self._global_index = {int(v): i for i, v in enumerate(self.to_global)}
        return self._global_index.get(int(g))

    def transition_matrix(self) -> sp.csr_matrix:
        deg = np.maximum(self.degrees, 1)
        data = np.repeat(1.0 / deg, self.degrees)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.size, self.size))

    def check_connected(self) -> None:
        """Raise ModelViolationError if some vertex cannot reach the root."""
        seen = np.zeros(self.size, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.neighbors(u):
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        if not seen.all():
            raise ModelViolationError(f"ball is disconnected ({int((~seen).sum())} unreachable vertices)")

    def return_probability_exact(self) -> ReturnEstimate:
        """Exact p~: substochastic iteration for a finite cap, linear solve otherwise."""
        if self.size > EXACT_MAX_STATES:
            raise DomainError(f"exact mode needs <= {EXACT_MAX_STATES} states, ball has {self.size}")
        if self.root_degree == 0:
            return ReturnEstimate(p=1.0, degree=0, mode="exact", isolated=True)
        P = self.transition_matrix()
        first = self.neighbors(0)
        if self.cap is None:
            h = hitting_probability(P, [0], np.flatnonzero(self.exit_mask))
            return ReturnEstimate(p=float(h[first].mean()), degree=self.root_degree, mode="exact")
        dist = np.zeros(self.size)
        np.add.at(dist, first, 1.0 / first.size)
        dist[self.exit_mask] = 0.0
        returned = 0.0
        PT = P.T.tocsr()
        for _ in range(self.cap):
            dist = PT @ dist
            returned += dist[0]
            dist[0] = 0.0
            dist[self.exit_mask] = 0.0
        return ReturnEstimate(p=float(min(returned, 1.0)), degree=self.root_degree, mode="exact")

    def return_probability_mc(self, rng: np.random.Generator, trials: int = 2000, z: float = 1.96) -> ReturnEstimate:
        """Monte Carlo p~ with a Wilson interval; all trials advance in lockstep."""
        if self.root_degree == 0:
            return ReturnEstimate(p=1.0, degree=0, mode="monte-carlo", isolated=True, trials=trials)
        if self.cap is None:
            raise DomainError("Monte Carlo return probability needs a finite cap")
        first = self.neighbors(0)
        pos = first[rng.integers(0, first.size, size=trials)]
        alive = ~self.exit_mask[pos]
        returned = np.zeros(trials, dtype=bool)
        for _ in range(self.cap):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            cur = pos[idx]
            deg = self.degrees[cur]
            step = np.minimum((rng.random(idx.size) * deg).astype(np.int64), deg - 1)
            pos[idx] = self.indices[self.indptr[cur] + step]
            home = pos[idx] == 0
            returned[idx[home]] = True
            alive[idx[home]] = False
            alive[idx[self.exit_mask[pos[idx]]]] = False
        hits = int(returned.sum())
        lo, hi = wilson_interval(hits, trials, z)
        return ReturnEstimate(
            p=hits / trials, degree=self.root_degree, mode="monte-carlo", ci_low=lo, ci_high=hi, trials=trials
        )

    def sample_excursion(self, rng: np.random.Generator, limit: Optional[int] = None) -> Tuple[List[int], str]:
        """One excursion from the root in local indices.

        Returns the visited local vertices (root first) and how it ended:
        ``return`` (back at the root within ``limit`` steps after the first),
        ``exit`` (absorbed) or ``escape`` (still away after ``limit`` steps).
        """
        if self.root_degree == 0:
            raise DomainError("root has no ball neighbour")
        limit = self.cap if limit is None else limit
        first = self.neighbors(0)
        path = [0, int(first[rng.integers(first.size)])]
        if self.exit_mask[path[-1]]:
            return path, "exit"
        steps = 0
        while limit is None or steps < limit:
            u = path[-1]
            nbrs = self.neighbors(u)
            path.append(int(nbrs[rng.integers(nbrs.size)]))
            steps += 1
            if path[-1] == 0:
                return path, "return"
            if self.exit_mask[path[-1]]:
                return path, "exit"
        return path, "escape"
