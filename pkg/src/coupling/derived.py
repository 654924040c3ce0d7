"""Derived processes of the coupling: X^ from the transcript and the
independent-increment process built from the coupling variables alone."""

from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from ..exploration.types import Phase, bin_edges
from ..percolation.bands import DisplacementBands
from ..utils.errors import DomainError
from ..walks.path import Interpolation, PathNorm, StepFunction, lq_distance
from .geometric import CouplingStreams, TypePool, excursion_parameter, side_from_streams, side_indicator

if TYPE_CHECKING:
    from ..exploration.process import ExplorationResult, WalkTranscript

TypeKey = Tuple[int, int]


class IncrementVariables(BaseModel):
    """Side indicators and increments of the new vertices of one walk, in step order."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    steps: np.ndarray = Field(..., description="Steps at which a new vertex was met")
    sigma: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    offsets: np.ndarray = Field(..., description="(count, d) long-jump offsets")

    @property
    def Z(self) -> np.ndarray:
        return self.sigma[:, None] * self.offsets

    @property
    def Z_plus(self) -> np.ndarray:
        return self.sigma_plus[:, None] * self.offsets

    @property
    def Z_minus(self) -> np.ndarray:
        return self.sigma_minus[:, None] * self.offsets

    def z_max(self) -> int:
        return int(np.abs(self.offsets).max()) if self.offsets.size else 0


class DerivedPaths(BaseModel):
    """X, X^, X^+-, and the independent-increment process of one walk, unrescaled."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    ell: int
    X: np.ndarray
    X_hat: np.ndarray
    X_hat_plus: np.ndarray
    X_hat_minus: np.ndarray
    X_frak: np.ndarray
    main: np.ndarray = Field(..., description="(n+1,) mask of main-phase times")
    scale: float = Field(..., description="2^{-k/alpha}")
    alpha: float
    increments: IncrementVariables

    @property
    def n(self) -> int:
        return int(self.X.shape[0] - 1)

    def rescaled(self, name: str, mode: Interpolation = Interpolation.STEP) -> StepFunction:
        values = getattr(self, name).astype(np.float64) * self.scale
        return StepFunction(n=self.n, a=1.0 / self.alpha, values=values, mode=mode)

    def main_phase_gap(self) -> float:
        """max over main-phase i of 2^{-k/alpha} |X^_i - X_i|_inf."""
        diff = np.abs(self.X_hat - self.X).max(axis=1)[self.main]
        return float(diff.max() * self.scale) if diff.size else 0.0


class DerivedReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    paths: List[DerivedPaths]
    skipped: List[int] = Field(default_factory=list, description="Flagged walks left out")
    q: float
    main_phase_gaps: List[float]
    lq_hat_vs_walk: List[float]
    lq_hat_vs_frak: List[float]
    exchangeability_p: Optional[float] = None

    def to_report(self) -> dict:
        def median(xs):
            return float(np.median(xs)) if xs else None

        return {
            "walks": len(self.paths),
            "skipped": self.skipped,
            "q": self.q,
            "median_main_phase_gap": median(self.main_phase_gaps),
            "median_lq_hat_vs_walk": median(self.lq_hat_vs_walk),
            "median_lq_hat_vs_frak": median(self.lq_hat_vs_frak),
            "exchangeability_p": self.exchangeability_p,
        }


def _sigma_bounds(
    streams: CouplingStreams, ell: int, j: int, m: int, iota: int, edges: np.ndarray, p_x: float, d_x: int, sigma: int
) -> Tuple[int, int]:
    """sigma^- and sigma^+: the v-side parameter evaluated at q_{j-1} and q_j."""
    if j == 0 or p_x >= 1.0 or d_x < 1:
        return sigma, sigma
    R_x = streams.R_tilde(ell, j, m, iota).value(excursion_parameter(p_x, d_x))
    R = streams.R(ell, j, m, iota)
    lower = side_indicator(R.value(excursion_parameter(edges[j - 1], m)), R_x)
    upper = side_indicator(R.value(excursion_parameter(edges[j], m)), R_x)
    return lower, upper


def increment_variables(walk: "WalkTranscript", streams: CouplingStreams, q_grid: np.ndarray) -> IncrementVariables:
    """sigma, sigma^+- and offsets at every new vertex of the walk.

    A new vertex without a long edge has a zero offset. A vertex with two or more
    long edges is an error step and contributes nothing.
    """
    edges = bin_edges(q_grid)
    steps = walk.new_steps()
    k = steps.size
    sigma = np.zeros(k, dtype=np.int64)
    plus = np.zeros(k, dtype=np.int64)
    minus = np.zeros(k, dtype=np.int64)
    for r, i in enumerate(steps.tolist()):
        if walk.long_count[i] != 1:
            continue
        j, m, iota = int(walk.N_j[i]), int(walk.N_m[i]), int(walk.iota[i])
        p_v, d_v = float(walk.new_p[i]), int(walk.new_d[i])
        p_x, d_x = float(walk.x_p[i]), int(walk.x_d[i])
        sides = side_from_streams(streams, walk.ell, j, m, iota, p_v, d_v, p_x, d_x)
        if sides is None:
            continue
        sigma[r] = sides[2]
        minus[r], plus[r] = _sigma_bounds(streams, walk.ell, j, m, iota, edges, p_x, d_x, sides[2])
    offsets = np.where((walk.long_count[steps] == 1)[:, None], walk.offset[steps], 0)
    return IncrementVariables(steps=steps, sigma=sigma, sigma_plus=plus, sigma_minus=minus, offsets=offsets)


def _cumulative(steps: np.ndarray, Z: np.ndarray, n: int, d: int) -> np.ndarray:
    jumps = np.zeros((n, d), dtype=np.int64)
    np.add.at(jumps, steps, Z)
    return np.concatenate([np.zeros((1, d), dtype=np.int64), np.cumsum(jumps, axis=0)])


class _FreshOffsets:
    """Offsets of type indices beyond what the walk met, from the w streams."""

    def __init__(self, result: "ExplorationResult", streams: CouplingStreams):
        lattice = result.state.lattice
        box = (lattice.lo, lattice.hi) if lattice.is_torus else (-(lattice.L - 1), lattice.L - 1)
        reach = max(-box[0], box[1])
        self.d = lattice.d
        self.streams = streams
        self.bands = None
        if result.scales.rho < reach:
            self.bands = DisplacementBands(result.params, result.scales.rho, reach, box=box)

    def __call__(self, ell: int, j: int, m: int, iota: int) -> np.ndarray:
        if self.bands is None or not self.bands.bands:
            return np.zeros(self.d, dtype=np.int64)
        z = self.bands.sample_field(self.streams.far_edges(ell, j, m, iota))
        if z.shape[0] != 1:
            return np.zeros(self.d, dtype=np.int64)
        return z[0].astype(np.int64)


def _frak_path(
    walk: "WalkTranscript",
    n: int,
    d: int,
    q_grid: np.ndarray,
    rates: Mapping[TypeKey, float],
    streams: CouplingStreams,
    pool: TypePool,
    fresh: _FreshOffsets,
) -> np.ndarray:
    """Sum over types (j, m) in [J]^2 of Z^+_iota for iota <= floor(i C_{j,m})."""
    edges = bin_edges(q_grid)
    J = len(q_grid)
    met: Dict[Tuple[int, int, int], np.ndarray] = {}
    for i in walk.new_steps().tolist():
        if walk.long_count[i] == 1:
            met[(int(walk.N_j[i]), int(walk.N_m[i]), int(walk.iota[i]))] = walk.offset[i]
    out = np.zeros((n + 1, d), dtype=np.int64)
    times = np.arange(n + 1)
    for j in range(1, J + 1):
        for m in range(1, J + 1):
            rate = float(rates.get((j, m), 0.0))
            count = int(np.floor(n * rate))
            if count <= 0:
                continue
            Zp = np.zeros((count, d), dtype=np.int64)
            for iota in range(1, count + 1):
                offset = met.get((j, m, iota))
                if offset is None:
                    offset = fresh(walk.ell, j, m, iota)
                if not offset.any():
                    continue
                sample = streams.type_sample(pool, walk.ell, j, m, iota)
                if sample.r >= 1.0 or sample.d < 1:
                    continue
                R_v = streams.R(walk.ell, j, m, iota).value(excursion_parameter(edges[j], m))
                R_x = streams.R_tilde(walk.ell, j, m, iota).value(excursion_parameter(sample.r, sample.d))
                Zp[iota - 1] = side_indicator(R_v, R_x) * offset
            clock = np.floor(times * rate).astype(np.int64)
            partial = np.concatenate([np.zeros((1, d), dtype=np.int64), np.cumsum(Zp, axis=0)])
            out += partial[np.minimum(clock, count)]
    return out


def exchangeability_test(frak_paths: List[np.ndarray], blocks: int = 8, resamples: int = 999, seed: int = 0) -> Optional[float]:
    """Permutation p-value for equal block-increment laws of the first and second half."""
    if not frak_paths:
        return None
    first, second = [], []
    for X in frak_paths:
        n = X.shape[0] - 1
        cuts = np.linspace(0, n, blocks + 1).astype(np.int64)
        inc = np.abs(X[cuts[1:]] - X[cuts[:-1]]).max(axis=1).astype(np.float64)
        first.extend(inc[: blocks // 2])
        second.extend(inc[blocks // 2 :])
    a, b = np.asarray(first), np.asarray(second)
    if np.all(a == a[0]) and np.all(b == a[0]):
        return 1.0
    res = stats.permutation_test(
        (a, b),
        lambda x, y: np.mean(x) - np.mean(y),
        permutation_type="independent",
        n_resamples=resamples,
        random_state=np.random.default_rng(seed),
    )
    return float(res.pvalue)


def build_derived_processes(
    result: "ExplorationResult",
    rates: Optional[Mapping[TypeKey, float]],
    *,
    streams: Optional[CouplingStreams] = None,
    pool: Optional[TypePool] = None,
    q: float = 2.0,
    allow_flagged: bool = False,
    pilot_samples: int = 2000,
) -> DerivedReport:
    """Build X^, X^+-, and the independent-increment process for every walk.

    Args:
        result: Exploration run
        rates: Per-type rates C_{q_{j-1},q_j,m} keyed by (j, m)
        streams: Coupling streams; derived from the run seed when omitted
        pool: Empirical (p~, d~) law; a pilot sample of the run state when omitted
        q: Exponent of the L^q distances
        allow_flagged: Keep walks with error flags
        pilot_samples: Size of the pilot sample for the default pool

    Raises:
        DomainError: the rate table is missing
    """
    if rates is None:
        raise DomainError("build_derived_processes needs the type-rate table")
    streams = streams or CouplingStreams(result.seed)
    if pool is None:
        pool = TypePool(*result.state.pilot_types(pilot_samples))
    q_grid = np.asarray(result.q_grid)
    fresh = _FreshOffsets(result, streams)
    scale = result.scales.scale_factor
    alpha = result.params.alpha
    d = result.params.d

    paths, skipped = [], []
    for walk in result.walks:
        if not walk.error_free and not allow_flagged:
            skipped.append(walk.ell)
            continue
        n = walk.n
        inc = increment_variables(walk, streams, q_grid)
        in_main = walk.phase == Phase.MAIN
        main = np.append(in_main, in_main[-1])
        paths.append(
            DerivedPaths(
                ell=walk.ell,
                X=walk.path.displacement()[: n + 1],
                X_hat=_cumulative(inc.steps, inc.Z, n, d),
                X_hat_plus=_cumulative(inc.steps, inc.Z_plus, n, d),
                X_hat_minus=_cumulative(inc.steps, inc.Z_minus, n, d),
                X_frak=_frak_path(walk, n, d, q_grid, rates, streams, pool, fresh),
                main=main,
                scale=scale,
                alpha=alpha,
                increments=inc,
            )
        )
    return DerivedReport(
        paths=paths,
        skipped=skipped,
        q=q,
        main_phase_gaps=[p.main_phase_gap() for p in paths],
        lq_hat_vs_walk=[lq_distance(p.rescaled("X_hat"), p.rescaled("X"), q, PathNorm.SUP) for p in paths],
        lq_hat_vs_frak=[lq_distance(p.rescaled("X_hat"), p.rescaled("X_frak"), q, PathNorm.SUP) for p in paths],
        exchangeability_p=exchangeability_test([p.X_frak for p in paths], seed=result.seed),
    )
