"""The V* graph: two local balls joined by a single long edge.

Two ways of producing the V* walk from v are provided:

* ``excursion_path`` assembles it from the geometric counts R_v, R_x. At a
  root r every excursion either crosses to the other root (type 1), returns
  to r within the cap (type 2) or escapes (type 3). Before each decisive
  (type 1 or 3) excursion there are Geom(1 - b_r) type-2 excursions with
  b_r = p~_r d~_r / (1 + d~_r); the decisive excursions at r cross R_r times
  and then escape. Type-2 and type-3 excursions are drawn by rejection from
  the ball walk.
* ``simulate_vstar`` runs the V* walk step by step, reads R_v and R_x off the
  excursions it sees, completes the censored count with further excursions
  from the unresolved root and checks the side rule per trial.
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..utils.errors import DomainError
from ..utils.stats import ks_against_geometric
from ..walks.ball import LocalBall, ReturnEstimate
from .geometric import excursion_parameter, side_indicator

MAX_REJECTIONS = 10_000


class VStar:
    """Union of ``ball_v`` and ``ball_x`` plus the edge {v, x}.

    Local indices: ball_v occupies 0..nv-1 (v = 0), ball_x occupies
    nv..nv+nx-1 (x = nv).
    """

    def __init__(self, ball_v: LocalBall, ball_x: LocalBall):
        if ball_v.cap != ball_x.cap:
            raise DomainError("both balls must share one cap")
        self.ball_v = ball_v
        self.ball_x = ball_x
        self.cap = ball_v.cap
        self.offset = ball_v.size
        self.v, self.x = 0, self.offset
        self.size = ball_v.size + ball_x.size

    def ball(self, root: int) -> LocalBall:
        return self.ball_v if root == self.v else self.ball_x

    def shift(self, root: int) -> int:
        return 0 if root == self.v else self.offset

    def other(self, root: int) -> int:
        return self.x if root == self.v else self.v

    def neighbors(self, u: int) -> np.ndarray:
        if u < self.offset:
            nbrs = self.ball_v.neighbors(u)
        else:
            nbrs = self.ball_x.neighbors(u - self.offset) + self.offset
        if u == self.v:
            return np.append(nbrs, self.x)
        if u == self.x:
            return np.append(nbrs, self.v)
        return nbrs

    def degree(self, u: int) -> int:
        return int(self.neighbors(u).size)

    def is_exit(self, u: int) -> bool:
        if u < self.offset:
            return bool(self.ball_v.exit_mask[u])
        return bool(self.ball_x.exit_mask[u - self.offset])

    def to_global(self, local: np.ndarray) -> np.ndarray:
        local = np.asarray(local, dtype=np.int64)
        return np.where(
            local < self.offset,
            self.ball_v.to_global[np.minimum(local, self.offset - 1)],
            self.ball_x.to_global[np.clip(local - self.offset, 0, self.ball_x.size - 1)],
        )

    def local_index(self, g: int) -> Optional[int]:
        i = self.ball_v.local_index(g)
        if i is not None:
            return i
        i = self.ball_x.local_index(g)
        return None if i is None else i + self.offset

    def root_quantities(self, root: int) -> ReturnEstimate:
        return self.ball(root).return_probability_exact()

    def excursion(self, root: int, rng: np.random.Generator) -> Tuple[List[int], str]:
        path, outcome = self.ball(root).sample_excursion(rng)
        shift = self.shift(root)
        return [u + shift for u in path], outcome

    def conditioned_excursion(self, root: int, rng: np.random.Generator, returning: bool) -> Optional[List[int]]:
        """Excursion conditioned on returning within the cap, or on not returning."""
        for _ in range(MAX_REJECTIONS):
            path, outcome = self.excursion(root, rng)
            if (outcome == "return") == returning:
                return path
        return None


class YPath(BaseModel):
    """A V* walk assembled from excursions."""

    local: List[int] = Field(..., description="Local V* indices, time 0 first")
    t0: Optional[int] = Field(default=None, description="Time of the last root visit before the escape")
    crossings: int = Field(default=0, description="Crossings of {v, x} before the escape")
    escaped_from: Optional[int] = Field(default=None, description="Root the walk escaped from")

    @property
    def side(self) -> Optional[int]:
        if self.escaped_from is None:
            return None
        return int(self.escaped_from != 0)


def _type2_count(p: float, d: int, rng: np.random.Generator) -> int:
    b = p * d / (1.0 + d)
    if b <= 0.0:
        return 0
    return int(rng.geometric(1.0 - b)) - 1


def excursion_path(
    vstar: VStar,
    R_v: int,
    R_x: int,
    length: int,
    rng: np.random.Generator,
    p_v: Optional[float] = None,
    p_x: Optional[float] = None,
) -> Optional[YPath]:
    """V* walk of ``length`` + 1 positions built from the counts R_v, R_x.

    Returns None when a conditioned excursion cannot be drawn.
    """
    est_v = vstar.root_quantities(vstar.v)
    est_x = vstar.root_quantities(vstar.x)
    p = {vstar.v: est_v.p if p_v is None else p_v, vstar.x: est_x.p if p_x is None else p_x}
    d = {vstar.v: est_v.degree, vstar.x: est_x.degree}
    budget = {vstar.v: R_v, vstar.x: R_x}
    path: List[int] = [vstar.v]
    root = vstar.v
    crossings = 0
    while len(path) <= length:
        for _ in range(_type2_count(p[root], d[root], rng)):
            exc = vstar.conditioned_excursion(root, rng, returning=True)
            if exc is None:
                return None
            path.extend(exc[1:])
        if budget[root] > 0:
            budget[root] -= 1
            root = vstar.other(root)
            path.append(root)
            crossings += 1
            continue
        t0 = len(path) - 1
        exc = vstar.conditioned_excursion(root, rng, returning=False)
        if exc is None:
            return None
        path.extend(exc[1:])
        while len(path) <= length and not vstar.is_exit(path[-1]):
            nbrs = vstar.neighbors(path[-1])
            path.append(int(nbrs[rng.integers(nbrs.size)]))
        return YPath(local=path[: length + 1], t0=t0, crossings=crossings, escaped_from=root)
    return YPath(local=path[: length + 1], crossings=crossings)


class VStarTrial(BaseModel):
    R_v: int
    R_x: int
    side: int
    crossings: int
    tau_star: int
    well_defined: bool = True


class VStarReport(BaseModel):
    """Crossing statistics of the V* walk."""

    trials: int = Field(..., description="Trials run")
    well_defined: int = Field(..., description="Trials that resolved before the step limit")
    p_v: float = Field(..., description="Exact local return probability at v")
    d_v: int = Field(..., description="Ball degree of v")
    p_x: float = Field(..., description="Exact local return probability at x")
    d_x: int = Field(..., description="Ball degree of x")
    param_v: Optional[float] = Field(default=None, description="Geometric parameter of R_v")
    param_x: Optional[float] = Field(default=None, description="Geometric parameter of R_x")
    ks_v: Optional[float] = Field(default=None, description="KS distance of R_v to Geom(param_v)")
    ks_x: Optional[float] = Field(default=None, description="KS distance of R_x to Geom(param_x)")
    side_rule_agreement: float = Field(..., description="Fraction of trials with side = (R_v > R_x)")
    parity_agreement: float = Field(..., description="Fraction with side x iff odd crossings")
    mean_R_v: float = Field(default=0.0)
    mean_R_x: float = Field(default=0.0)

    def to_report(self) -> dict:
        return self.model_dump()


def _decisive(vstar: VStar, root: int, rng: np.random.Generator, clock: List[int]) -> Tuple[str, int]:
    """Run excursions from ``root`` until a decisive one; returns (kind, start time)."""
    while True:
        start = clock[0]
        nbrs = vstar.neighbors(root)
        nxt = int(nbrs[rng.integers(nbrs.size)])
        clock[0] += 1
        if nxt == vstar.other(root):
            return "cross", start
        # inside the ball: follow until return within cap, exit or escape
        pos, steps = nxt, 0
        if vstar.is_exit(pos):
            return "escape", start
        while True:
            if vstar.cap is not None and steps >= vstar.cap:
                return "escape", start
            nb = vstar.neighbors(pos)
            pos = int(nb[rng.integers(nb.size)])
            clock[0] += 1
            steps += 1
            if pos == root:
                break
            if vstar.is_exit(pos):
                return "escape", start


def _completion(vstar: VStar, root: int, rng: np.random.Generator, limit: int) -> Optional[int]:
    """Count further crossings at ``root`` until its first escape."""
    clock = [0]
    count = 0
    while clock[0] < limit:
        kind, _ = _decisive(vstar, root, rng, clock)
        if kind == "escape":
            return count
        count += 1
    return None


def simulate_vstar(
    ball_v: LocalBall,
    ball_x: LocalBall,
    trials: int,
    rng: np.random.Generator,
    max_steps: int = 1_000_000,
) -> VStarReport:
    """Step-by-step V* walk from v until the first escape.

    Raises:
        ModelViolationError: a ball is disconnected
        DomainError: a root has p~ = 1 or no ball neighbour
    """
    ball_v.check_connected()
    ball_x.check_connected()
    vstar = VStar(ball_v, ball_x)
    est_v, est_x = vstar.root_quantities(vstar.v), vstar.root_quantities(vstar.x)
    param_v = excursion_parameter(est_v.p, est_v.degree)
    param_x = excursion_parameter(est_x.p, est_x.degree)
    results: List[VStarTrial] = []
    for _ in range(trials):
        clock = [0]
        counts = {vstar.v: 0, vstar.x: 0}
        root = vstar.v
        escaped = None
        tau_star = -1
        while clock[0] < max_steps:
            kind, start = _decisive(vstar, root, rng, clock)
            if kind == "escape":
                escaped, tau_star = root, start + (vstar.cap or 0)
                break
            counts[root] += 1
            root = vstar.other(root)
        if escaped is None:
            results.append(VStarTrial(R_v=-1, R_x=-1, side=-1, crossings=-1, tau_star=-1, well_defined=False))
            continue
        other = vstar.other(escaped)
        extra = _completion(vstar, other, rng, max_steps)
        if extra is None:
            results.append(VStarTrial(R_v=-1, R_x=-1, side=-1, crossings=-1, tau_star=-1, well_defined=False))
            continue
        crossings = counts[vstar.v] + counts[vstar.x]
        R = {escaped: counts[escaped], other: counts[other] + extra}
        results.append(
            VStarTrial(
                R_v=R[vstar.v],
                R_x=R[vstar.x],
                side=int(escaped == vstar.x),
                crossings=crossings,
                tau_star=tau_star,
            )
        )
    good = [r for r in results if r.well_defined]
    R_v = np.array([r.R_v for r in good], dtype=np.int64)
    R_x = np.array([r.R_x for r in good], dtype=np.int64)
    sides = np.array([r.side for r in good], dtype=np.int64)
    parity = np.array([r.crossings % 2 for r in good], dtype=np.int64)
    rule = np.array([side_indicator(a, b) for a, b in zip(R_v, R_x)], dtype=np.int64)
    return VStarReport(
        trials=trials,
        well_defined=len(good),
        p_v=est_v.p,
        d_v=est_v.degree,
        p_x=est_x.p,
        d_x=est_x.degree,
        param_v=param_v,
        param_x=param_x,
        ks_v=ks_against_geometric(R_v, param_v) if good else None,
        ks_x=ks_against_geometric(R_x, param_x) if good else None,
        side_rule_agreement=float((rule == sides).mean()) if good else 0.0,
        parity_agreement=float((parity == sides).mean()) if good else 0.0,
        mean_R_v=float(R_v.mean()) if good else 0.0,
        mean_R_x=float(R_x.mean()) if good else 0.0,
    )


def random_ball(rng: np.random.Generator, size: int, extra_edges: int, cap: Optional[int]) -> LocalBall:
    """Random connected ball: a random tree plus a few extra edges."""
    if size < 2:
        raise DomainError("a ball fixture needs at least two vertices")
    edges = set()
    for u in range(1, size):
        w = int(rng.integers(u))
        edges.add((w, u))
    for _ in range(extra_edges):
        a, b = (int(t) for t in rng.integers(0, size, size=2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return LocalBall.from_edges(size, sorted(edges), cap=cap)


def random_vstar_fixture(
    rng: np.random.Generator,
    min_size: int = 2,
    max_size: int = 8,
    cap: int = 4,
) -> Tuple[LocalBall, LocalBall]:
    """Two random balls whose roots both have p~ < 1."""
    balls = []
    while len(balls) < 2:
        size = int(rng.integers(min_size, max_size + 1))
        ball = random_ball(rng, size, int(rng.integers(0, size)), cap)
        if ball.return_probability_exact().p < 1.0:
            balls.append(ball)
    return balls[0], balls[1]
