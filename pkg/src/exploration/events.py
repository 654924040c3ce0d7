"""Per-step event indicators along walk paths.

Events are evaluated against the edges a view knows about: a materialized
Environment knows every edge, an ExplorationState knows its near field plus the
far edges in its registry. A long edge has sup-length > rho; T is the special
phase length 2^{gamma k + 1}, cap is 2^{gamma k} and R the ball radius 2^{delta k}.

    A  a long edge {X_i, v} exists
    B  A, and no far end v is visited at steps i+1..i+T
    C  max_{0 <= t <= cap} |X_{i+t} - X_i| > R
    D  a far end v is reached after i without crossing X_i -> v
    E  A, and x = X_i or v carries another edge to some y with
       min(|y - x|, |y - v|) >= R
    F  A, and the walk is at X_i or some v again at a step >= i+T
    G  A and B and C
"""

from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..walks.path import WalkPath
from .scales import Scales
from .state import ExplorationState

EVENTS = ("A", "B", "C", "D", "E", "F", "G")

Edge = Tuple[int, int]


class WalkEvents(BaseModel):
    """Boolean indicators of one walk, one row per step."""

    ell: int
    steps: int
    counts: Dict[str, int]
    unions: Dict[str, bool]
    long_edges: List[Edge] = Field(default_factory=list, description="Long edges with an endpoint on the walk")


class EventReport(BaseModel):
    """Event frequencies over an ensemble of walks."""

    walks: int
    steps: int
    frequencies: Dict[str, float] = Field(..., description="Mean per-step indicator of each event")
    unions: Dict[str, float] = Field(..., description="Fraction of walks on which the event occurs at some step")
    f_star: Optional[float] = Field(default=None, description="Fraction of walk pairs touching a common long edge")
    pairs: int = 0
    coupling_success: Optional[float] = Field(default=None, description="Fraction of error-free transcripts")
    rho: int
    ball_radius: int
    cap: int
    special_length: int

    def to_report(self) -> dict:
        return self.model_dump()


def _neighbor_fn(view) -> Callable[[int], np.ndarray]:
    if isinstance(view, ExplorationState):
        return view.known_neighbors
    return view.neighbors


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _long_at(view, neighbors, rho: int, v: int) -> np.ndarray:
    nbrs = neighbors(v)
    if not nbrs.size:
        return nbrs
    return nbrs[view.lattice.sup_distance(np.full(nbrs.size, v), nbrs) > rho]


def _far_edge(view, neighbors, x: int, v: int, radius: int) -> bool:
    """Another edge at x or v whose far end y has min(|y - x|, |y - v|) >= radius."""
    lattice = view.lattice
    for a, b in ((x, v), (v, x)):
        ys = neighbors(a)
        if not ys.size:
            continue
        keep = (lattice.sup_distance(np.full(ys.size, a), ys) >= radius) & (
            lattice.sup_distance(np.full(ys.size, b), ys) >= radius
        )
        if keep.any():
            return True
    return False


def _escapes(positions: np.ndarray, n: int, cap: int, radius: int) -> np.ndarray:
    """C at every step: max_{0 <= t <= cap} |X_{i+t} - X_i| > radius, cut at the path end."""
    out = np.zeros(n, dtype=bool)
    for t in range(1, min(cap, n) + 1):
        m = n + 1 - t
        out[:m] |= np.abs(positions[t:] - positions[:m]).max(axis=1) > radius
    return out


def scan_walk(path: WalkPath, view, scales: Scales) -> WalkEvents:
    """Indicators of A to G at every step i = 0..n-1 of one walk.

    Each event is the origin event shifted to X_i; time windows that run past
    the end of the path are cut at step n.
    """
    neighbors = _neighbor_fn(view)
    rho, R, cap, T = scales.rho, scales.ball_radius, scales.cap, scales.special_length
    vertices = path.vertices
    n = path.n_steps
    steps = vertices[:n].tolist()

    long_of: Dict[int, np.ndarray] = {v: _long_at(view, neighbors, rho, v) for v in np.unique(vertices).tolist()}
    touched = sorted({_edge(v, int(x)) for v, xs in long_of.items() for x in xs.tolist()})

    visits: Dict[int, List[int]] = {}
    for t, v in enumerate(vertices.tolist()):
        visits.setdefault(v, []).append(t)
    times = {v: np.asarray(ts, dtype=np.int64) for v, ts in visits.items()}
    none = np.empty(0, dtype=np.int64)

    A = np.array([long_of[v].size > 0 for v in steps], dtype=bool)
    B = np.zeros(n, dtype=bool)
    D = np.zeros(n, dtype=bool)
    E = np.zeros(n, dtype=bool)
    F = np.zeros(n, dtype=bool)
    heavy: Dict[int, bool] = {}
    for i in np.flatnonzero(A).tolist():
        x = steps[i]
        far = long_of[x].tolist()
        window_hit = False
        for v in far:
            ts = times.get(v, none)
            after = ts[np.searchsorted(ts, i, side="right") :]
            if after.size and after[0] <= i + T:
                window_hit = True
            if after.size and int(vertices[after[0] - 1]) != x:
                D[i] = True
            if after.size and after[-1] >= i + T:
                F[i] = True
        B[i] = not window_hit
        if times[x][-1] >= i + T:
            F[i] = True
        if x not in heavy:
            heavy[x] = any(_far_edge(view, neighbors, x, v, R) for v in far)
        E[i] = heavy[x]

    C = _escapes(path.positions, n, cap, R)
    G = A & B & C

    flags = {"A": A, "B": B, "C": C, "D": D, "E": E, "F": F, "G": G}
    return WalkEvents(
        ell=path.ell,
        steps=n,
        counts={k: int(v.sum()) for k, v in flags.items()},
        unions={k: bool(v.any()) for k, v in flags.items()},
        long_edges=touched,
    )


def f_star_frequency(walks: Sequence[WalkEvents], pairs: Optional[Sequence[Tuple[int, int]]] = None) -> Tuple[float, int]:
    """Fraction of walk pairs that touch at least one common long edge."""
    if pairs is None:
        pairs = list(combinations(range(len(walks)), 2))
    if not pairs:
        return 0.0, 0
    sets = [set(w.long_edges) for w in walks]
    hits = sum(1 for a, b in pairs if sets[a] & sets[b])
    return hits / len(pairs), len(pairs)


def event_scan(
    paths: Sequence[WalkPath],
    view,
    scales: Scales,
    error_free: Optional[Sequence[bool]] = None,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
) -> EventReport:
    """Scan every walk and aggregate the event frequencies.

    Args:
        paths: Walk paths on one environment
        view: Environment or ExplorationState the paths ran on
        scales: Exploration scales providing rho, the ball radius and the phase lengths
        error_free: Per-walk coupling success, when the paths come from a transcript
        pairs: Walk pairs for F*; all pairs when omitted
    """
    scanned = [scan_walk(path, view, scales) for path in paths]
    total = sum(w.steps for w in scanned)
    frequencies = {k: (sum(w.counts[k] for w in scanned) / total if total else 0.0) for k in EVENTS}
    unions = {k: (sum(w.unions[k] for w in scanned) / len(scanned) if scanned else 0.0) for k in EVENTS}
    f_star, n_pairs = f_star_frequency(scanned, pairs)
    success = None
    if error_free is not None and len(error_free):
        success = float(np.mean(error_free))
    return EventReport(
        walks=len(scanned),
        steps=total,
        frequencies=frequencies,
        unions=unions,
        f_star=f_star,
        pairs=n_pairs,
        coupling_success=success,
        rho=scales.rho,
        ball_radius=scales.ball_radius,
        cap=scales.cap,
        special_length=scales.special_length,
    )
