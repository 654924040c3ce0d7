"""The walk observed at cutpoints: exact gap transition probabilities,
spacings and the diffusion constant K*."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.linalg import spsolve

from ..percolation.cutpoints import CutpointSet, detect_cutpoints
from ..percolation.generator import Environment
from ..utils.errors import DomainError, ModelViolationError
from ..utils.streams import StreamFactory, StreamRole
from ..walks.engine import run_ensemble

SYMMETRY_TOL = 1e-10


class CutpointChain(BaseModel):
    """Cutpoint chain of one d = 1 environment.

    ``Q_up[j]`` = Q(j, j+1) and ``Q_down[j]`` = Q(j+1, j) for the gap between
    cutpoints j and j+1; ``spacings[j]`` = p_{j+1} - p_j = 1 / Q(j, j+1).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    cutpoints: np.ndarray
    Q_up: np.ndarray
    Q_down: np.ndarray
    spacings: np.ndarray
    mean_gap: float
    mean_spacing: float
    K_star: float
    time_fraction: float = Field(..., description="Sum of cutpoint degrees over total degree")
    y_diffusivity: Optional[float] = Field(default=None, description="Var(c_{J_n}) / n of simulated cutpoint walks")
    walk_diffusivity: Optional[float] = Field(default=None, description="Var(X_t) / t regression slope")

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.cutpoints)

    @property
    def Q_stay(self) -> np.ndarray:
        """Q(j, j) for interior cutpoints 1..M-1."""
        return 1.0 - self.Q_up[1:] - self.Q_down[:-1]

    @property
    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.Q_up - self.Q_down))) if self.Q_up.size else 0.0

    @property
    def resistance_violations(self) -> int:
        return int(np.sum(1.0 / self.Q_up > 2.0 * self.gaps * (1.0 + 1e-12)))

    def to_report(self) -> dict:
        return {
            "cutpoints": int(self.cutpoints.size),
            "mean_gap": self.mean_gap,
            "mean_spacing": self.mean_spacing,
            "K_star": self.K_star,
            "sqrt_K_star": float(np.sqrt(self.K_star)),
            "symmetry_error": self.symmetry_error,
            "symmetric": self.symmetry_error <= SYMMETRY_TOL,
            "resistance_violations": self.resistance_violations,
            "time_fraction": self.time_fraction,
            "y_diffusivity": self.y_diffusivity,
            "walk_diffusivity": self.walk_diffusivity,
            "K_star_times_fraction": self.K_star * self.time_fraction,
        }


def _harmonic(env: Environment, cut: CutpointSet) -> np.ndarray:
    """h(u) = P_u(hit the right cutpoint of u's gap before the left one), one global solve.

    Vertices outside (c_0, c_M) and cutpoints themselves hold nan.
    """
    L = env.params.L
    c = cut.positions
    x = np.arange(L)
    is_cut = np.zeros(L, dtype=bool)
    is_cut[c] = True
    interior = (x > c[0]) & (x < c[-1]) & ~is_cut
    h = np.full(L, np.nan)
    idx = np.flatnonzero(interior)
    if idx.size == 0:
        return h
    A = env.csr()
    sub = A[idx][:, idx]
    deg = env.degrees[idx].astype(np.float64)
    # cutpoints carry no long edges, so only u = c_{j+1} - 1 touches the right end
    right = c[np.searchsorted(c, idx)]
    to_cut = (idx + 1 == right).astype(np.float64)
    M = (sp.diags(deg) - sub).tocsc()
    h[idx] = spsolve(M, to_cut)
    if not np.all(np.isfinite(h[idx])):
        raise ModelViolationError("gap subgraph is disconnected from its cutpoints")
    return h


def _y_diffusivity(cut: np.ndarray, up: np.ndarray, down: np.ndarray, n: int, chains: int, rng: np.random.Generator) -> float:
    """Var(c_{J_n}) / n for the cutpoint chain J started mid-window."""
    M = cut.size - 1
    J = np.full(chains, M // 2, dtype=np.int64)
    for _ in range(n):
        u = rng.random(chains)
        p_up = np.where(J < M, up[np.minimum(J, M - 1)], 0.0)
        p_down = np.where(J > 0, down[np.maximum(J - 1, 0)], 0.0)
        J = J + (u < p_up) - ((u >= p_up) & (u < p_up + p_down))
    return float(np.var(cut[J] - cut[M // 2]) / n)


def _walk_diffusivity(env: Environment, start: int, t_max: int, walks: int, streams: StreamFactory) -> float:
    """Slope of Var(X_t) against t over the second half of [0, t_max]."""
    paths = run_ensemble(env, start, t_max, walks, streams)
    X = np.stack([p.displacement()[:, 0] for p in paths]).astype(np.float64)
    t = np.arange(t_max // 2, t_max + 1)
    var = X[:, t].var(axis=0)
    return float(np.polyfit(t, var, 1)[0])


def cutpoint_chain(
    env: Environment,
    y_steps: int = 0,
    y_chains: int = 2000,
    walk_steps: int = 0,
    walks: int = 200,
    streams: Optional[StreamFactory] = None,
) -> CutpointChain:
    """Exact Q, spacings and K* = 2 E[c_1 - c_0]^2 / E[p_1 - p_0] of a d = 1 environment.

    The wrap-around gap of a torus is left out. Optional cross-checks simulate
    the cutpoint chain (``y_steps``) and the walk itself (``walk_steps``).

    Raises:
        UnsupportedDimensionError: d != 1
        ModelViolationError: nearest-neighbour edges are not forced, or a gap
            does not connect to its cutpoints
        DomainError: fewer than two cutpoints
    """
    if env.params.d == 1 and not env.params.nn_prob_one:
        raise ModelViolationError("the cutpoint chain needs forced nearest-neighbour edges")
    cut = detect_cutpoints(env)
    c = cut.positions
    if c.size < 2:
        raise DomainError("fewer than two cutpoints; the chain is empty")
    h = _harmonic(env, cut)
    deg = env.degrees.astype(np.float64)
    gaps = np.diff(c)
    # from c_j the walk steps right to c_j + 1; from c_{j+1} left to c_{j+1} - 1
    step_right = np.where(gaps == 1, 1.0, h[np.minimum(c[:-1] + 1, env.params.L - 1)])
    step_left = np.where(gaps == 1, 1.0, 1.0 - h[np.maximum(c[1:] - 1, 0)])
    up = step_right / deg[c[:-1]]
    down = step_left / deg[c[1:]]
    if not (np.all(np.isfinite(up)) and np.all(np.isfinite(down))):
        raise ModelViolationError("non-finite gap transition probability")
    spacings = 1.0 / up
    mean_gap, mean_spacing = float(gaps.mean()), float(spacings.mean())
    streams = streams or StreamFactory(env.seed)
    chain = CutpointChain(
        cutpoints=c,
        Q_up=up,
        Q_down=down,
        spacings=spacings,
        mean_gap=mean_gap,
        mean_spacing=mean_spacing,
        K_star=2.0 * mean_gap**2 / mean_spacing,
        time_fraction=float(deg[c].sum() / deg.sum()),
    )
    if y_steps > 0:
        chain.y_diffusivity = _y_diffusivity(c, up, down, y_steps, y_chains, streams.generator(StreamRole.MONTE_CARLO, 1))
    if walk_steps > 0:
        chain.walk_diffusivity = _walk_diffusivity(env, int(c[c.size // 2]), walk_steps, walks, streams)
    return chain
