"""The exploration process for a sequence of walks on a lazily revealed
environment, with the special phase coupling at clean long edges.

Main phase, at X_i = v:

* v already fully revealed: plain step; error code 1 if v carries a long edge.
* v new: its type (j, m) is computed from the ball V_v, phi^{j,m} is
  incremented and the far edges of v are drawn from w_iota^{ell,j,m}. Then

  - no long edge: plain step;
  - two or more long edges, or the single far endpoint x lies within
    2^{delta k + 1} of W+ or of v's ball: error code 2, plain step;
  - x is revealed; a degree mismatch deg(v) != d~_v + 1 or deg(x) != d~_x + 1
    gives error code 3 and a plain step;
  - otherwise A = 1 and the special phase starts with the step from v.

Special phase: the V* walk Y is assembled from R_v and R_x; X follows Y with
probability deg_{V*}/deg at each step and desyncs otherwise (code 5). Code 4
marks a long edge at a V* vertex other than v and x; code 6 marks a failure of
the event K or a degenerate root (p~ = 1), in which case X runs free.
"""

import gzip
import json
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..coupling.geometric import CouplingStreams, side_from_streams
from ..coupling.vstar import VStar, excursion_path
from ..percolation.model import ModelParams
from ..utils.errors import DomainError
from ..utils.reporting import StageLogger
from ..utils.streams import StreamRole
from ..walks.engine import assemble_path
from ..walks.path import WalkPath
from .scales import Scales, scale_parameters
from .state import ExplorationState
from .types import Phase, estimate_q_grid, type_bin, validate_q_grid


class RevealOutcome(BaseModel):
    """Classification of a newly visited vertex.

    ``case`` is 1 without long edges, 2 for an error (code in ``B``) and 3 for
    a single clean long edge (A = 1).
    """

    v: int
    j: int
    m: int
    iota: int
    p: float
    d: int
    long_neighbors: List[int] = Field(default_factory=list)
    offset: List[int] = Field(default_factory=list)
    case: int = 1
    B: int = 0
    A: int = 0
    x: Optional[int] = None
    p_x: Optional[float] = None
    d_x: Optional[int] = None


class CouplingRecord(BaseModel):
    """Bookkeeping of one special phase."""

    ell: int
    i: int
    v: int
    x: int
    offset: List[int]
    p_v: float
    d_v: int
    p_x: float
    d_x: int
    j: int
    m: int
    iota: int
    R_v: Optional[int] = None
    R_x: Optional[int] = None
    side: Optional[int] = None
    tau: Optional[int] = None
    tau_star: Optional[int] = None
    K: Optional[bool] = None
    truncated: bool = False
    degenerate: bool = False


class WalkTranscript(BaseModel):
    """Per-step flags of one walk; arrays are indexed by step i = 0..n-1."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    ell: int
    path: WalkPath
    phase: np.ndarray
    A: np.ndarray
    B: np.ndarray
    N_j: np.ndarray
    N_m: np.ndarray
    iota: np.ndarray
    new_p: np.ndarray
    new_d: np.ndarray
    offset: np.ndarray
    long_count: np.ndarray
    x_p: np.ndarray
    x_d: np.ndarray
    couplings: List[CouplingRecord] = Field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.phase.size)

    @property
    def error_free(self) -> bool:
        return not bool(self.B.any())

    def new_steps(self) -> np.ndarray:
        return np.flatnonzero(self.N_j >= 0)

    def phi(self, j: int, m: int) -> np.ndarray:
        """phi_i^{j,m} = number of type-(j, m) new vertices strictly before step i."""
        hits = ((self.N_j == j) & (self.N_m == m)).astype(np.int64)
        return np.concatenate([[0], np.cumsum(hits)[:-1]])

    def records(self) -> Iterator[Dict[str, Any]]:
        for i in range(self.n):
            njm = None if self.N_j[i] < 0 else [int(self.N_j[i]), int(self.N_m[i])]
            yield {
                "ell": self.ell,
                "i": i,
                "pos": self.path.positions[i].tolist(),
                "phase": "special" if self.phase[i] == Phase.SPECIAL else "main",
                "A": int(self.A[i]),
                "Bcode": int(self.B[i]),
                "Njm": njm,
                "phi": None if njm is None else int(self.iota[i]) - 1,
            }


class ExplorationResult(BaseModel):
    """Transcript of a run plus the state it left behind."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: ModelParams
    seed: int
    scales: Scales
    q_grid: List[float]
    walks: List[WalkTranscript]
    state: ExplorationState

    @property
    def paths(self) -> List[WalkPath]:
        return [w.path for w in self.walks]

    @property
    def error_free(self) -> bool:
        return all(w.error_free for w in self.walks)

    def code_counts(self) -> Dict[int, int]:
        codes = np.concatenate([w.B for w in self.walks])
        return {c: int((codes == c).sum()) for c in range(1, 7)}

    def to_report(self) -> dict:
        return {
            "seed": self.seed,
            "k": self.scales.k,
            "walks": len(self.walks),
            "error_free": self.error_free,
            "error_free_walks": sum(w.error_free for w in self.walks),
            "code_counts": self.code_counts(),
            "special_phases": sum(len(w.couplings) for w in self.walks),
            "q_grid": self.q_grid,
            "scales": self.scales.to_report(),
            "state": self.state.to_report(),
        }


def reveal_long_edges(
    state: ExplorationState,
    streams: CouplingStreams,
    v: int,
    ell: int,
    counters: Dict[Tuple[int, int], int],
    i: int = 0,
) -> RevealOutcome:
    """Reveal a newly visited vertex and classify its long edges.

    Args:
        state: Exploration state (v must not be revealed yet)
        streams: Coupling streams; far edges come from w_iota^{ell,j,m}
        v: The new vertex
        ell: Walk index
        counters: Per-type phi counters of the walk, updated in place
        i: Step index, keys the reveal of the far endpoint
    """
    p, d = state.local_quantities(v)
    j, m = type_bin(p, d, state.q_grid)
    iota = counters.get((j, m), 0) + 1
    counters[(j, m)] = iota
    state.reveal(v, streams.far_edges(ell, j, m, iota))
    state.visited.add(v)
    long = state.long_neighbors(v)
    lattice = state.lattice
    offset = lattice.displacement(np.full(long.size, v), long).reshape(-1, lattice.d).sum(axis=0)
    out = RevealOutcome(
        v=v, j=j, m=m, iota=iota, p=p, d=d,
        long_neighbors=long.tolist(), offset=[int(c) for c in offset],
    )
    if long.size == 0:
        return out
    if long.size >= 2:
        out.case, out.B = 2, 2
        return out
    x = int(long[0])
    out.x = x
    out.p_x, out.d_x = state.local_quantities(x)
    limit = state.scales.proximity_radius
    if state.sup_distance(v, np.array([x]))[0] <= limit or state.distance_to_revealed(x, exclude=[v]) <= limit:
        out.case, out.B = 2, 2
        return out
    state.reveal(x, streams.special_far_edges(ell, i))
    if state.degree(v) != d + 1 or state.degree(x) != out.d_x + 1:
        out.case, out.B = 2, 3
        return out
    out.case, out.A = 3, 1
    return out


class _WalkRunner:
    """Runs walk ell through main and special phases."""

    def __init__(self, state: ExplorationState, streams: CouplingStreams, ell: int, start: int):
        self.state = state
        self.streams = streams
        self.ell = ell
        self.n = n = state.scales.horizon
        self.u = state.streams.generator(StreamRole.WALK, ell).random(n)
        self.vertices = np.empty(n + 1, dtype=np.int64)
        self.vertices[0] = start
        d = state.lattice.d
        self.phase = np.zeros(n, dtype=np.int8)
        self.A = np.zeros(n, dtype=np.int8)
        self.B = np.zeros(n, dtype=np.int8)
        self.N_j = np.full(n, -1, dtype=np.int16)
        self.N_m = np.full(n, -1, dtype=np.int16)
        self.iota = np.zeros(n, dtype=np.int32)
        self.new_p = np.full(n, np.nan)
        self.new_d = np.full(n, -1, dtype=np.int32)
        self.offset = np.zeros((n, d), dtype=np.int64)
        self.long_count = np.zeros(n, dtype=np.int16)
        self.x_p = np.full(n, np.nan)
        self.x_d = np.full(n, -1, dtype=np.int32)
        self.counters: Dict[Tuple[int, int], int] = {}
        self.couplings: List[CouplingRecord] = []

    def flag(self, i: int, code: int) -> None:
        if 0 <= i < self.n and self.B[i] == 0:
            self.B[i] = code

    def _ensure_revealed(self, v: int, i: int) -> None:
        if v not in self.state.revealed:
            self.state.reveal(v, self.streams.special_far_edges(self.ell, i))
        self.state.visited.add(v)

    def plain_step(self, i: int) -> None:
        v = int(self.vertices[i])
        self._ensure_revealed(v, i)
        nbrs = self.state.neighbors(v)
        if nbrs.size == 0:
            raise DomainError(f"walk {self.ell} is stuck at isolated vertex {v}")
        self.vertices[i + 1] = nbrs[min(int(self.u[i] * nbrs.size), nbrs.size - 1)]

    def run(self) -> WalkTranscript:
        i = 0
        while i < self.n:
            i = self.main_step(i)
        path = assemble_path(self.state, self.vertices, self.ell, (self.state.seed, int(StreamRole.WALK), self.ell))
        return WalkTranscript(
            ell=self.ell, path=path, phase=self.phase, A=self.A, B=self.B,
            N_j=self.N_j, N_m=self.N_m, iota=self.iota, new_p=self.new_p, new_d=self.new_d,
            offset=self.offset, long_count=self.long_count, x_p=self.x_p, x_d=self.x_d,
            couplings=self.couplings,
        )

    def main_step(self, i: int) -> int:
        v = int(self.vertices[i])
        if v in self.state.revealed:
            self.state.visited.add(v)
            if self.state.has_long_edge(v):
                self.flag(i, 1)
            self.plain_step(i)
            return i + 1
        out = reveal_long_edges(self.state, self.streams, v, self.ell, self.counters, i)
        self.N_j[i], self.N_m[i], self.iota[i] = out.j, out.m, out.iota
        self.new_p[i], self.new_d[i] = out.p, out.d
        self.offset[i] = out.offset
        self.long_count[i] = len(out.long_neighbors)
        if out.x is not None:
            self.x_p[i], self.x_d[i] = out.p_x, out.d_x
        if out.A:
            return self.special_phase(i, out)
        self.flag(i, out.B)
        self.plain_step(i)
        return i + 1

    def special_phase(self, i0: int, out: RevealOutcome) -> int:
        state, scales = self.state, self.state.scales
        T = scales.special_length
        v, x = out.v, int(out.x)
        record = CouplingRecord(
            ell=self.ell, i=i0, v=v, x=x, offset=out.offset, p_v=out.p, d_v=out.d,
            p_x=float(out.p_x), d_x=int(out.d_x), j=out.j, m=out.m, iota=out.iota,
        )
        self.couplings.append(record)
        self.A[i0] = 1
        rng = self.streams.excursions(self.ell, i0)
        sides = side_from_streams(
            self.streams, self.ell, out.j, out.m, out.iota, out.p, out.d, record.p_x, record.d_x
        )
        vstar: Optional[VStar] = None
        Y: Optional[np.ndarray] = None
        ypath = None
        if sides is not None:
            record.R_v, record.R_x, record.side = sides
            vstar = VStar(state.local_ball(v), state.local_ball(x))
            ypath = excursion_path(vstar, record.R_v, record.R_x, T + 1, rng, out.p, record.p_x)
            if ypath is not None:
                Y = vstar.to_global(ypath.local)
        record.degenerate = Y is None
        if record.degenerate:
            self.flag(i0 + 1, 6)
        synced = not record.degenerate
        tau: Optional[int] = None
        for t in range(T + 1):
            i = i0 + t
            if i >= self.n:
                record.truncated = True
                break
            if t > 0:
                self.phase[i] = Phase.SPECIAL
            cur = int(self.vertices[i])
            if not synced:
                self.plain_step(i)
                continue
            self._ensure_revealed(cur, i)
            if cur not in (v, x) and state.has_long_edge(cur):
                self.flag(i, 4)
            nbrs = state.neighbors(cur)
            local = vstar.local_index(cur)
            star = vstar.to_global(vstar.neighbors(local))
            if rng.random() < star.size / nbrs.size:
                self.vertices[i + 1] = Y[t + 1]
                continue
            others = np.setdiff1d(nbrs, star)
            self.vertices[i + 1] = others[rng.integers(others.size)]
            synced, tau = False, t
            if t < T:
                self.flag(i, 5)
        if record.truncated or record.degenerate:
            return min(i0 + T + 1, self.n)
        record.tau = T if tau is None else tau
        if ypath.t0 is not None:
            record.tau_star = ypath.t0 + scales.cap
        record.K = bool(
            record.tau == T
            and record.tau_star is not None
            and record.tau_star < T
            and not np.isin(Y[record.tau_star : T + 1], [v, x]).any()
        )
        if not record.K:
            self.flag(i0 + T, 6)
        return i0 + T + 1


def run_exploration(
    params: ModelParams,
    seed: int,
    k: int,
    walks: int,
    *,
    q_grid: Optional[List[float]] = None,
    J: int = 8,
    gamma: Optional[float] = None,
    rho_floor: int = 2,
    sampler: str = "auto",
    pilot_samples: int = 2000,
    local_trials: int = 2000,
    start: int = 0,
    logger: Optional[StageLogger] = None,
) -> ExplorationResult:
    """Run walks ell = 1..walks for 2^k steps each on one lazily revealed environment.

    Args:
        params: Model parameters (d < s < d + 1)
        seed: Master seed
        k: Dyadic level
        walks: Number of walks, run sequentially in index order
        q_grid: Type grid; estimated from a pilot sample of p~ when omitted
        J: Number of q-grid points when estimating
        gamma: Special-phase exponent override
        rho_floor: Floor of the long-edge threshold
        sampler: Far-edge sampler ``auto``, ``hash`` or ``skip``
        pilot_samples: Vertices sampled for the q-grid
        local_trials: Monte Carlo trials for balls above the exact limit
        start: Start vertex of every walk
        logger: Optional stage logger
    """
    logger = logger or StageLogger("exploration")
    scales = scale_parameters(k, params.s, params.d, gamma=gamma, rho_floor=rho_floor)
    for message in scales.warnings:
        logger.warn(message)
    if params.d >= 3:
        logger.warn("exploration in d >= 3 is an untested tier")
    if walks < 1:
        raise DomainError(f"walk count must be >= 1, got {walks}")
    state = ExplorationState(params, seed, scales, sampler=sampler, local_trials=local_trials)
    if q_grid is None:
        p_pilot, _ = state.pilot_types(pilot_samples)
        state.q_grid = estimate_q_grid(p_pilot, J)
    else:
        state.q_grid = validate_q_grid(q_grid)
    streams = CouplingStreams(seed)
    logger.start("exploration", k=k, walks=walks, rho=scales.rho, sampler=state.sampler)
    transcripts = []
    for ell in range(1, walks + 1):
        transcripts.append(_WalkRunner(state, streams, ell, start).run())
        logger.info(f"walk {ell}: codes {np.bincount(transcripts[-1].B, minlength=7)[1:].tolist()}")
    result = ExplorationResult(
        params=params, seed=seed, scales=scales, q_grid=[float(q) for q in state.q_grid],
        walks=transcripts, state=state,
    )
    logger.finish("exploration", error_free=result.error_free)
    return result


def write_transcript(result: ExplorationResult, target: Union[str, Path], compress: bool = False) -> Path:
    """JSON-lines transcript: a header, one record per step, one per special phase."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    opener = gzip.open if compress else open
    with opener(target, "wt") as handle:
        header = {
            "type": "header",
            "params": result.params.model_dump(mode="json"),
            "seed": result.seed,
            "scales": result.scales.model_dump(mode="json"),
            "q_grid": result.q_grid,
        }
        handle.write(json.dumps(header, sort_keys=True) + "\n")
        for walk in result.walks:
            for record in walk.records():
                handle.write(json.dumps(record, sort_keys=True) + "\n")
            for coupling in walk.couplings:
                handle.write(json.dumps({"type": "coupling", **coupling.model_dump()}, sort_keys=True) + "\n")
    return target


def read_transcript(source: Union[str, Path]) -> List[Dict[str, Any]]:
    source = Path(source)
    opener = gzip.open if source.suffix == ".gz" else open
    with opener(source, "rt") as handle:
        return [json.loads(line) for line in handle if line.strip()]
