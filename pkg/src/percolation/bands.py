"""Dyadic sup-norm bands of displacements with an envelope edge probability.

The set of displacements r_min < ||z||_inf <= r_max (inside an optional box)
is cut into bands [lo, 2 lo - 1]. Within a band the long-edge law is bounded
by its value at ||z|| = lo, which gives an exact envelope for

* realizing the independent Bernoulli field {z : w(z) = 1} (Binomial count of
  envelope successes, a uniform distinct subset, then thinning), and
* sampling i.i.d. jumps with P(z) proportional to the law (band choice by
  envelope mass, uniform point, acceptance).


The norm totals of many independent fields use the full pair law, so unit
displacements carry P(1) = 1 when nearest-neighbour edges are forced.
"""

from typing import List, Optional, Tuple

import numpy as np

from ..utils.errors import DomainError
from .model import ModelParams, displacement_norm, long_edge_probability, pair_probability

_MAX_ENUMERATION = 5_000_000
_DENSE = 0.1
_CHUNK = 1 << 22
_PIECE = 1 << 62


def _binomial(rng: np.random.Generator, trials: int, p: float) -> int:
    """Binomial(trials, p) for trial counts past int64, summed over pieces."""
    full, rest = divmod(int(trials), _PIECE)
    k = int(rng.binomial(rest, p))
    if full:
        k += int(rng.binomial(_PIECE, p, size=full).sum())
    return k


class DisplacementBands:
    """Band decomposition of a displacement window.

    Args:
        params: Model parameters supplying the law and the norm
        r_min: Exclusive lower bound on ||z||_inf
        r_max: Inclusive upper bound on ||z||_inf
        box: Optional per-coordinate bounds (lo, hi) of admissible z
    """

    def __init__(
        self,
        params: ModelParams,
        r_min: int,
        r_max: int,
        box: Optional[Tuple[int, int]] = None,
    ):
        if r_max is None or not np.isfinite(r_max):
            raise DomainError("displacement window must be bounded")
        if r_min < 0:
            raise DomainError(f"r_min must be >= 0, got {r_min}")
        self.params = params
        self.d = params.d
        self.r_min = int(r_min)
        self.box = box if box is not None else (-int(r_max), int(r_max))
        reach = max(-self.box[0], self.box[1])
        self.r_max = int(min(r_max, reach))
        self.bands: List[Tuple[int, int]] = []
        lo = self.r_min + 1
        while lo <= self.r_max:
            hi = min(2 * lo - 1, self.r_max)
            self.bands.append((lo, hi))
            lo = hi + 1
        self.counts = np.array([self._shell_count(lo, hi) for lo, hi in self.bands], dtype=np.int64)
        lows = np.array([lo for lo, _ in self.bands], dtype=np.float64)
        self.envelope = (
            np.asarray(long_edge_probability(lows, params), dtype=np.float64)
            if self.bands
            else np.empty(0)
        )

    def _axis_count(self, h: int) -> int:
        if h < 0:
            return 0
        return max(0, min(h, self.box[1]) - max(-h, self.box[0]) + 1)

    def _shell_count(self, lo: int, hi: int) -> int:
        return self._axis_count(hi) ** self.d - self._axis_count(lo - 1) ** self.d

    @property
    def candidate_count(self) -> int:
        return int(self.counts.sum())

    def law(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(
            long_edge_probability(displacement_norm(z, self.params.norm), self.params)
        )

    def _uniform_in_band(self, rng: np.random.Generator, band: int, size: int) -> np.ndarray:
        lo, hi = self.bands[band]
        a, b = max(-hi, self.box[0]), min(hi, self.box[1])
        out = np.empty((0, self.d), dtype=np.int64)
        while out.shape[0] < size:
            need = size - out.shape[0]
            draw = rng.integers(a, b + 1, size=(2 * need + 8, self.d))
            draw = draw[np.abs(draw).max(axis=1) >= lo]
            out = np.concatenate([out, draw[:need]])
        return out

    def _key(self, z: np.ndarray) -> np.ndarray:
        span = 2 * self.r_max + 1
        key = np.zeros(z.shape[0], dtype=np.int64)
        for k in range(self.d):
            key = key * span + (z[:, k] + self.r_max)
        return key

    def _distinct_in_band(self, rng: np.random.Generator, band: int, size: int) -> np.ndarray:
        if size >= self.counts[band]:
            return self.enumerate_band(band)
        chosen = np.empty((0, self.d), dtype=np.int64)
        keys = np.empty(0, dtype=np.int64)
        while chosen.shape[0] < size:
            draw = self._uniform_in_band(rng, band, size - chosen.shape[0])
            merged = np.concatenate([chosen, draw])
            merged_keys = np.concatenate([keys, self._key(draw)])
            _, first = np.unique(merged_keys, return_index=True)
            first.sort()
            chosen, keys = merged[first], merged_keys[first]
        return chosen[:size]

    def enumerate_band(self, band: int) -> np.ndarray:
        lo, hi = self.bands[band]
        a, b = max(-hi, self.box[0]), min(hi, self.box[1])
        axis = np.arange(a, b + 1, dtype=np.int64)
        grid = np.stack(np.meshgrid(*([axis] * self.d), indexing="ij"), axis=-1)
        grid = grid.reshape(-1, self.d)
        return grid[np.abs(grid).max(axis=1) >= lo]

    def sample_field(self, rng: np.random.Generator) -> np.ndarray:
        """Displacements z with w(z) = 1 for an independent Bernoulli(law) field."""
        hits = []
        for band in range(len(self.bands)):
            k = int(rng.binomial(self.counts[band], self.envelope[band]))
            if k == 0:
                continue
            z = self._distinct_in_band(rng, band, k)
            accept = rng.random(z.shape[0]) * self.envelope[band] < self.law(z)
            hits.append(z[accept])
        if not hits:
            return np.empty((0, self.d), dtype=np.int64)
        return np.concatenate(hits)

    def expected_count(self) -> float:
        """Sum of the law over the window (exact enumeration when feasible)."""
        total = 0.0
        for band in range(len(self.bands)):
            if self.counts[band] <= _MAX_ENUMERATION:
                total += float(self.law(self.enumerate_band(band)).sum())
            elif self.d == 1:
                lo, hi = self.bands[band]
                r = np.arange(lo, hi + 1, dtype=np.float64)
                total += 2.0 * float(np.asarray(long_edge_probability(r, self.params)).sum())
            else:
                raise DomainError("band too large for exact enumeration")
        return total

    def sample_jumps(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n i.i.d. displacements with P(z) proportional to the law."""
        if not self.bands:
            raise DomainError("empty displacement window")
        if self.d == 1 and self.box == (-self.r_max, self.r_max):
            return self._sample_jumps_1d(rng, n)
        mass = self.counts * self.envelope
        mass = mass / mass.sum()
        out = np.empty((0, self.d), dtype=np.int64)
        while out.shape[0] < n:
            need = n - out.shape[0]
            bands = rng.choice(len(self.bands), size=need, p=mass)
            for band in np.unique(bands):
                k = int((bands == band).sum())
                z = self._uniform_in_band(rng, int(band), k)
                accept = rng.random(k) * self.envelope[band] < self.law(z)
                out = np.concatenate([out, z[accept]])
        return out[:n]

    def _sample_jumps_1d(self, rng: np.random.Generator, n: int) -> np.ndarray:
        r = np.arange(self.r_min + 1, self.r_max + 1, dtype=np.int64)
        if not hasattr(self, "_cdf"):
            weights = np.asarray(long_edge_probability(r.astype(np.float64), self.params))
            cdf = np.cumsum(weights)
            self._cdf = cdf / cdf[-1]
        idx = np.searchsorted(self._cdf, rng.random(n), side="right")
        idx = np.minimum(idx, r.size - 1)
        signs = np.where(rng.random(n) < 0.5, -1, 1)
        return (signs * r[idx])[:, None]

    def point_probabilities(self) -> Tuple[np.ndarray, np.ndarray]:
        """Support and normalized law, for small windows (exact fits)."""
        pts = [self.enumerate_band(b) for b in range(len(self.bands))]
        z = np.concatenate(pts) if pts else np.empty((0, self.d), dtype=np.int64)
        w = self.law(z)
        return z, w / w.sum()

    def _distinct_pairs(self, rng: np.random.Generator, band: int, slots: int, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """A uniform subset of ``size`` distinct (slot, z) pairs, z in the band."""
        rows = np.empty((0, self.d + 1), dtype=np.int64)
        while rows.shape[0] < size:
            need = size - rows.shape[0]
            draw = np.column_stack([rng.integers(0, slots, need), self._uniform_in_band(rng, band, need)])
            merged = np.concatenate([rows, draw])
            _, first = np.unique(merged, axis=0, return_index=True)
            first.sort()
            rows = merged[first]
        return rows[:, 0], rows[:, 1:]

    def field_norm_totals(self, rng: np.random.Generator, copies: int, steps: int = 1) -> np.ndarray:
        """sum_{i <= steps} sum_z ||z|| w_i(z) for ``copies`` independent runs.

        Every w_i(z) is an independent Bernoulli(P(z)) indicator over the
        whole window. Bands with a large envelope are enumerated and each point
        gets a Binomial(steps, P(z)) count; the remaining bands draw their
        envelope successes over all (step, z) slots and thin them.
        """
        if copies < 1 or steps < 1:
            raise DomainError(f"copies and steps must be >= 1, got {copies}, {steps}")
        out = np.zeros(copies, dtype=np.float64)
        norm = self.params.norm
        for band, (lo, _) in enumerate(self.bands):
            if lo == 1 or self.envelope[band] >= _DENSE:
                z = self.enumerate_band(band)
                p = np.asarray(pair_probability(z, self.params), dtype=np.float64)
                lengths = displacement_norm(z, norm)
                rows = max(1, _CHUNK // z.shape[0])
                for a in range(0, copies, rows):
                    b = min(copies, a + rows)
                    out[a:b] += rng.binomial(steps, p, size=(b - a, p.size)) @ lengths
                continue
            per_copy = int(self.counts[band]) * steps
            rows = max(1, _CHUNK // max(1, int(per_copy * self.envelope[band])))
            for a in range(0, copies, rows):
                b = min(copies, a + rows)
                k = _binomial(rng, (b - a) * per_copy, float(self.envelope[band]))
                if k == 0:
                    continue
                slot, z = self._distinct_pairs(rng, band, (b - a) * steps, k)
                keep = rng.random(k) * self.envelope[band] < self.law(z)
                np.add.at(out, a + slot[keep] // steps, displacement_norm(z[keep], norm))
        return out
