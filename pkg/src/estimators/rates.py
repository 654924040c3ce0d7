"""Ergodic rates at which walks meet new vertices, overall and per type."""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..exploration.types import psi, type_bin, validate_q_grid
from ..utils.errors import DomainError
from ..walks.ball import EXACT_MAX_STATES, GraphView, LocalBall
from ..walks.path import WalkPath

TypeKey = Tuple[int, int]
TypeFunction = Callable[[int], TypeKey]


class LocalTypes:
    """Cached (j, m) of vertices of a materialized view."""

    def __init__(
        self,
        view: GraphView,
        q_grid: Sequence[float],
        ball_radius: int,
        cap: int,
        rng: Optional[np.random.Generator] = None,
        trials: int = 2000,
    ):
        self.view = view
        self.q_grid = validate_q_grid(q_grid)
        self.ball_radius = ball_radius
        self.cap = cap
        self.rng = rng or np.random.default_rng(0)
        self.trials = trials
        self._cache: Dict[int, TypeKey] = {}

    def quantities(self, v: int) -> Tuple[float, int]:
        ball = LocalBall.from_view(self.view, v, self.ball_radius, cap=self.cap)
        if ball.size <= EXACT_MAX_STATES:
            est = ball.return_probability_exact()
        else:
            est = ball.return_probability_mc(self.rng, self.trials)
        return est.p, est.degree

    def __call__(self, v: int) -> TypeKey:
        key = self._cache.get(v)
        if key is None:
            key = self._cache[v] = type_bin(*self.quantities(v), self.q_grid)
        return key


class RateReport(BaseModel):
    """Per-walk and ensemble new-vertex rates; ``C_table`` is keyed "j,m"."""

    t: int
    walks: int
    quenched: bool = Field(default=True, description="Walks share one environment")
    N_t: List[int] = Field(..., description="New vertices met by each walk in t steps")
    C_star: float
    C_table: Dict[str, float]
    C_bar: float = Field(..., description="Rate of the overflow bin (0, 0)")
    psi_J: float
    chi: float
    H_pass: List[bool]
    max_relative_deviation: float = Field(..., description="max_walk |N_t/t - C*| / C*")
    plateau_t: List[int]
    plateau: List[float] = Field(..., description="Ensemble mean N_s/s at dyadic s")

    @property
    def H_fraction(self) -> float:
        return float(np.mean(self.H_pass)) if self.H_pass else 0.0

    def rates(self) -> Dict[TypeKey, float]:
        out = {}
        for key, value in self.C_table.items():
            j, m = (int(x) for x in key.split(","))
            out[(j, m)] = value
        return out

    def to_report(self) -> dict:
        return {**self.model_dump(), "H_fraction": self.H_fraction}


def new_vertex_rates(
    paths: Sequence[WalkPath],
    q_grid: Sequence[float],
    type_of: TypeFunction,
    chi: float = 0.05,
    t: Optional[int] = None,
    quenched: bool = True,
) -> RateReport:
    """Type counts N_t^{j,m}, C*, C_{q_{j-1},q_j,m}, C-bar and the H_{k,chi} verdicts.

    Args:
        paths: Walks of equal length
        q_grid: Type grid; its length J also caps the degree bins
        type_of: Vertex to (j, m)
        chi: Tolerance of H_{k,chi}: |N_t^{j,m} - t C_{j,m}| <= chi t for every type
        t: Horizon; defaults to the shortest path
        quenched: Recorded flag, True when all walks share one environment

    Raises:
        DomainError: empty q-grid or no paths
    """
    if len(q_grid) == 0:
        raise DomainError("q-grid is empty")
    q = validate_q_grid(q_grid)
    if not paths:
        raise DomainError("new_vertex_rates needs at least one path")
    t = min(p.n_steps for p in paths) if t is None else int(t)
    if t < 1:
        raise DomainError("paths have no steps")
    J = q.size
    keys = [(0, 0)] + [(j, m) for j in range(1, J + 1) for m in range(1, J + 1)]
    index = {k: r for r, k in enumerate(keys)}
    counts = np.zeros((len(paths), len(keys)), dtype=np.int64)
    totals = np.zeros(len(paths), dtype=np.int64)
    cumulative = []
    for w, path in enumerate(paths):
        new = path.new[1 : t + 1]
        totals[w] = int(new.sum())
        cumulative.append(np.cumsum(new))
        for v in path.vertices[1 : t + 1][new].tolist():
            counts[w, index[type_of(int(v))]] += 1
    per_walk = totals / t
    C_star = float(per_walk.mean())
    C = counts.mean(axis=0) / t
    H = [bool(np.all(np.abs(counts[w] - t * C) <= chi * t)) for w in range(len(paths))]
    deviation = float(np.max(np.abs(per_walk - C_star)) / C_star) if C_star > 0 else 0.0
    plateau_t = [1 << e for e in range(int(np.log2(t)) + 1)]
    plateau = [float(np.mean([c[s - 1] for c in cumulative]) / s) for s in plateau_t]
    return RateReport(
        t=t,
        walks=len(paths),
        quenched=quenched,
        N_t=totals.tolist(),
        C_star=C_star,
        C_table={f"{j},{m}": float(C[index[(j, m)]]) for (j, m) in keys[1:]},
        C_bar=float(C[0]),
        psi_J=psi(q),
        chi=chi,
        H_pass=H,
        max_relative_deviation=deviation,
        plateau_t=plateau_t,
        plateau=plateau,
    )
