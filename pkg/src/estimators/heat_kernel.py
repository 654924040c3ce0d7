"""Return-probability decay P_t(0, 0) and its log-log exponent."""

from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field
from scipy import stats

from ..percolation.clusters import analyze_clusters
from ..percolation.generator import Environment
from ..utils.errors import DomainError
from ..utils.streams import StreamFactory
from ..walks.engine import run_ensemble

MODES = ("exact", "monte-carlo")


class HeatKernelReport(BaseModel):
    mode: str
    t_grid: List[int] = Field(..., description="Times used in the fit")
    returns: List[float] = Field(..., description="P_t(0, 0) at each time")
    slope: float
    ci_low: float
    ci_high: float
    radius: Optional[int] = Field(default=None, description="Ball radius of the exact iteration")
    boundary_mass: Optional[float] = None
    bipartite: bool = False
    trials: int = 0
    warnings: List[str] = Field(default_factory=list)

    def to_report(self) -> dict:
        return self.model_dump()


def is_bipartite(env: Environment) -> bool:
    """True when every edge flips the coordinate-sum parity (and wrap edges agree)."""
    lattice = env.lattice
    if lattice.is_torus and lattice.L % 2:
        return False
    parity = lattice.coords(np.arange(env.n_vertices)).sum(axis=1) % 2
    src = np.repeat(np.arange(env.n_vertices), env.degrees)
    return bool(np.all(parity[src] != parity[env.indices]))


def _ball_iteration(env: Environment, origin: int, radius: int, times: np.ndarray):
    """P_t(origin, origin) for the walk restricted to the ball, and the mass beyond radius/2 at the last time."""
    lattice = env.lattice
    dist = lattice.sup_distance(np.full(env.n_vertices, origin), np.arange(env.n_vertices))
    members = np.flatnonzero(dist <= radius)
    A = env.csr()[members][:, members].tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    PT = (sp.diags(1.0 / np.maximum(deg, 1.0)) @ A).T.tocsr()
    root = int(np.searchsorted(members, origin))
    mu = np.zeros(members.size)
    mu[root] = 1.0
    wanted = set(times.tolist())
    out = {}
    for t in range(1, int(times.max()) + 1):
        mu = PT @ mu
        if t in wanted:
            out[t] = float(mu[root])
    outer = float(mu[dist[members] > radius / 2.0].sum())
    return np.array([out[int(t)] for t in times]), outer


def heat_kernel_exponent(
    env: Environment,
    origin: int,
    t_grid: Sequence[int],
    mode: str = "exact",
    trials: int = 10_000,
    streams: Optional[StreamFactory] = None,
    tol: float = 1e-3,
    radius: Optional[int] = None,
) -> HeatKernelReport:
    """Slope of log P_t(0, 0) against log t.

    Exact mode iterates the kernel on a sup-ball whose radius doubles until the
    mass beyond half the radius at the last time is below ``tol``; Monte Carlo
    mode counts returns of an ensemble. Bipartite graphs use even t only.

    Raises:
        DomainError: unknown mode, origin outside the largest cluster, or
            fewer than two usable times
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    if not analyze_clusters(env).largest_mask[origin]:
        raise DomainError(f"origin {origin} is not in the largest cluster")
    warnings: List[str] = []
    times = np.array(sorted(set(int(t) for t in t_grid if t >= 1)))
    bipartite = is_bipartite(env)
    if bipartite:
        times = times[times % 2 == 0]
    if times.size < 2:
        raise DomainError("heat-kernel fit needs at least two usable times")

    outer = None
    used_radius = None
    if mode == "exact":
        reach = env.params.L // 2
        r = radius or max(8, int(np.sqrt(times.max())))
        while True:
            r = min(r, reach)
            returns, outer = _ball_iteration(env, origin, r, times)
            if outer < tol or r >= reach:
                break
            r *= 2
        if outer >= tol:
            warnings.append(f"boundary mass {outer:.2e} above {tol:g} on the whole torus")
        used_radius = r
    else:
        streams = streams or StreamFactory(env.seed)
        paths = run_ensemble(env, origin, int(times.max()), trials, streams)
        hits = np.stack([p.vertices[times] == origin for p in paths])
        returns = hits.mean(axis=0)

    keep = returns > 0
    if not keep.all():
        warnings.append(f"no returns at t={times[~keep].tolist()}; widen trials or truncate the grid")
    if keep.sum() < 2:
        raise DomainError("fewer than two times with positive return probability")
    fit = stats.linregress(np.log(times[keep]), np.log(returns[keep]))
    half = 1.96 * float(fit.stderr)
    return HeatKernelReport(
        mode=mode,
        t_grid=times[keep].tolist(),
        returns=returns[keep].tolist(),
        slope=float(fit.slope),
        ci_low=float(fit.slope) - half,
        ci_high=float(fit.slope) + half,
        radius=used_radius,
        boundary_mass=outer,
        bipartite=bipartite,
        trials=trials if mode == "monte-carlo" else 0,
        warnings=warnings,
    )
