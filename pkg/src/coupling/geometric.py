"""Geometric processes, excursion parameters and the keyed coupling streams."""

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..utils.errors import DomainError
from ..utils.streams import StreamFactory, StreamRole

_BLOCK = 64


class GeomStream:
    """Lazily drawn uniforms U_0, U_1, ... with R(t) = min{i >= 0 : U_i < t}.

    For a fixed stream R(t) is nonincreasing in t and has the Geom(t) law
    P(R = r) = (1 - t)^r t.
    """

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._uniforms = np.empty(0)
        self._cache: dict = {}

    def __len__(self) -> int:
        return int(self._uniforms.size)

    def _extend(self) -> None:
        self._uniforms = np.concatenate([self._uniforms, self._rng.random(max(_BLOCK, self._uniforms.size))])

    def value(self, t: float) -> int:
        if not 0.0 < t <= 1.0:
            raise DomainError(f"geometric parameter must lie in (0, 1], got {t}")
        if t in self._cache:
            return self._cache[t]
        start = 0
        while True:
            hits = np.flatnonzero(self._uniforms[start:] < t)
            if hits.size:
                r = int(start + hits[0])
                self._cache[t] = r
                return r
            start = self._uniforms.size
            self._extend()


def geometric_value(stream: GeomStream, t: float) -> int:
    """R(t) on ``stream``; monotone nonincreasing in t."""
    return stream.value(t)


def excursion_parameter(p: float, d: int) -> float:
    """(1 - p) d / (1 + (1 - p) d): chance a decisive excursion escapes.

    Raises:
        DomainError: p >= 1 or d < 1, where the parameter is undefined
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"return probability must lie in [0, 1), got {p}")
    if d < 1:
        raise DomainError(f"local degree must be >= 1, got {d}")
    x = (1.0 - p) * d
    return x / (1.0 + x)


def excursion_parameters(p: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Vectorized parameter; degenerate entries (p >= 1 or d < 1) give 0."""
    p = np.asarray(p, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    x = np.where((p < 1.0) & (d >= 1), (1.0 - p) * d, 0.0)
    return x / (1.0 + x)


def geometric_samples(rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
    """Failures before the first success; t = 0 gives an effectively infinite value."""
    t = np.asarray(t, dtype=np.float64)
    safe = np.where(t > 0, t, 0.5)
    out = rng.geometric(safe).astype(np.float64) - 1.0
    return np.where(t > 0, out, np.inf)


class TypeSample(BaseModel):
    """(r, d): a local return probability and local degree."""

    r: float = Field(..., ge=0.0, le=1.0, description="Local return probability")
    d: int = Field(..., ge=0, description="Local degree")


class TypePool:
    """Empirical law of (p~, d~) from a pilot sample."""

    def __init__(self, p: np.ndarray, d: np.ndarray):
        self.p = np.asarray(p, dtype=np.float64)
        self.d = np.asarray(d, dtype=np.int64)
        if self.p.size == 0 or self.p.size != self.d.size:
            raise DomainError("type pool needs matching, nonempty p and d samples")

    def __len__(self) -> int:
        return int(self.p.size)

    def sample(self, rng: np.random.Generator) -> TypeSample:
        i = int(rng.integers(self.p.size))
        return TypeSample(r=float(self.p[i]), d=int(self.d[i]))

    def sample_many(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        idx = rng.integers(0, self.p.size, size=size)
        return self.p[idx], self.d[idx]

    def to_report(self) -> dict:
        return {
            "size": len(self),
            "p_mean": float(self.p.mean()),
            "d_mean": float(self.d.mean()),
            "p_one_fraction": float((self.p >= 1.0).mean()),
        }


class CouplingStreams:
    """Keyed factory of the coupling's random objects.

    Every object is indexed by (walk ell, type j, type m, index iota); R and R~
    live in different roles so the two never share uniforms.
    """

    def __init__(self, seed: int):
        self.factory = StreamFactory(seed)

    @property
    def seed(self) -> int:
        return self.factory.seed

    def R(self, ell: int, j: int, m: int, iota: int) -> GeomStream:
        return GeomStream(self.factory.generator(StreamRole.GEOM_R, ell, j, m, iota))

    def R_tilde(self, ell: int, j: int, m: int, iota: int) -> GeomStream:
        return GeomStream(self.factory.generator(StreamRole.GEOM_R_TILDE, ell, j, m, iota))

    def type_sample(self, pool: TypePool, ell: int, j: int, m: int, iota: int) -> TypeSample:
        return pool.sample(self.factory.generator(StreamRole.TYPE, ell, j, m, iota))

    def far_edges(self, ell: int, j: int, m: int, iota: int) -> np.random.Generator:
        """Stream of w_iota^{ell,j,m}: the far-edge field of one new vertex."""
        return self.factory.generator(StreamRole.FAR_EDGES, ell, j, m, iota)

    def special_far_edges(self, ell: int, i: int) -> np.random.Generator:
        return self.factory.generator(StreamRole.SPECIAL_FAR_EDGES, ell, i)

    def excursions(self, ell: int, i: int) -> np.random.Generator:
        return self.factory.generator(StreamRole.EXCURSION, ell, i)

    def vstar(self, *index: int) -> np.random.Generator:
        return self.factory.generator(StreamRole.VSTAR, *index)

    def monte_carlo(self, *index: int) -> np.random.Generator:
        return self.factory.generator(StreamRole.MONTE_CARLO, *index)


def side_indicator(R_v: int, R_x: int) -> int:
    """1 when the walk ends on the x side: R_v > R_x."""
    return int(R_v > R_x)


def side_from_streams(
    streams: CouplingStreams,
    ell: int,
    j: int,
    m: int,
    iota: int,
    p_v: float,
    d_v: int,
    p_x: float,
    d_x: int,
) -> Optional[Tuple[int, int, int]]:
    """(R_v, R_x, side) or None when either root is degenerate."""
    if p_v >= 1.0 or d_v < 1 or p_x >= 1.0 or d_x < 1:
        return None
    R_v = streams.R(ell, j, m, iota).value(excursion_parameter(p_v, d_v))
    R_x = streams.R_tilde(ell, j, m, iota).value(excursion_parameter(p_x, d_x))
    return R_v, R_x, side_indicator(R_v, R_x)
