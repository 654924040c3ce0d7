"""Environment generation.

Two generation methods share one enumeration of displacement classes:

* ``skip`` iterates every canonical class z and jumps between successes with
  geometric gaps ceil(log u / log(1 - p(z))). Classes expecting at least one
  edge draw their gaps in batches from a keyed generator; the remaining sparse
  classes advance together in vectorized rounds on hashed uniforms.
* ``hash`` decides every pair by its own keyed uniform u(seed, min, max) < p.
  It is quadratic in the volume and only meant for small boxes, where it is
  the reference that exploration and monotonicity checks compare against.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..utils.errors import BudgetError, DomainError
from ..utils.streams import StreamFactory, StreamRole, hash_uniform
from .model import Boundary, Lattice, ModelParams, expected_long_edge_count, pair_probability

GENERATION_METHODS = ("skip", "hash")
HASH_MAX_VERTICES = 1 << 14
DEFAULT_MEMORY_BUDGET = 2 << 30


def edge_uniform(seed: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Per-edge uniform keyed by the unordered pair {u, v}."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    return hash_uniform(seed, int(StreamRole.EDGE), np.minimum(u, v), np.maximum(u, v))


class Environment:
    """Immutable LRP graph on a finite box.

    Long edges are stored once per unordered pair (``long_src < long_dst``) in
    lexicographic order. Nearest-neighbour edges are implicit when forced and
    otherwise stored in ``nn_open[v, k]`` (edge v -- v + e_k).
    """

    def __init__(
        self,
        params: ModelParams,
        seed: int,
        long_src: np.ndarray,
        long_dst: np.ndarray,
        nn_open: Optional[np.ndarray] = None,
        method: str = "skip",
    ):
        self.params = params
        self.seed = int(seed)
        self.method = method
        self.lattice = Lattice.from_params(params)
        src = np.asarray(long_src, dtype=np.int64)
        dst = np.asarray(long_dst, dtype=np.int64)
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        order = np.lexsort((hi, lo))
        self.long_src = lo[order]
        self.long_dst = hi[order]
        self.long_src.setflags(write=False)
        self.long_dst.setflags(write=False)
        if params.nn_prob_one:
            nn_open = None
        elif nn_open is None:
            nn_open = np.zeros((params.n_vertices, params.d), dtype=bool)
        self.nn_open = nn_open
        if self.nn_open is not None:
            self.nn_open.setflags(write=False)
        self._indptr: Optional[np.ndarray] = None
        self._indices: Optional[np.ndarray] = None

    @property
    def n_vertices(self) -> int:
        return self.params.n_vertices

    @property
    def long_edge_count(self) -> int:
        return int(self.long_src.size)

    def nearest_neighbor_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Open nearest-neighbour edges as (u, v) with v = u + e_k."""
        n = self.n_vertices
        us, vs = [], []
        base = np.arange(n, dtype=np.int64)
        for k, e in enumerate(self.lattice.unit_vectors()):
            target, valid = self.lattice.shift(base, e)
            if self.nn_open is not None:
                valid = valid & self.nn_open[:, k]
            us.append(base[valid])
            vs.append(target[valid])
        return np.concatenate(us), np.concatenate(vs)

    def _build(self) -> None:
        nu, nv = self.nearest_neighbor_edges()
        src = np.concatenate([nu, nv, self.long_src, self.long_dst])
        dst = np.concatenate([nv, nu, self.long_dst, self.long_src])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        # L = 4 tori can list the same nn pair from both directions
        keep = np.ones(src.size, dtype=bool)
        keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[keep], dst[keep]
        counts = np.bincount(src, minlength=self.n_vertices)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._indices = dst

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            self._build()
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        if self._indices is None:
            self._build()
        return self._indices

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbours of flat vertex ``v``."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def long_neighbors(self, v: int) -> np.ndarray:
        nbrs = self.neighbors(v)
        if nbrs.size == 0:
            return nbrs
        l1 = np.abs(self.lattice.displacement(np.full(nbrs.size, v), nbrs)).sum(axis=1)
        return nbrs[l1 > 1]

    def long_edges(self) -> Dict[int, List[int]]:
        """Associative view vertex -> sorted long neighbours (small boxes)."""
        out: Dict[int, List[int]] = {}
        for a, b in zip(self.long_src.tolist(), self.long_dst.tolist()):
            out.setdefault(a, []).append(b)
            out.setdefault(b, []).append(a)
        return {v: sorted(nbrs) for v, nbrs in out.items()}

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def csr(self) -> sp.csr_matrix:
        """Adjacency matrix with unit weights."""
        data = np.ones(self.indices.size, dtype=np.float64)
        n = self.n_vertices
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def max_long_length(self) -> int:
        if self.long_edge_count == 0:
            return 0
        return int(self.lattice.sup_distance(self.long_src, self.long_dst).max())


def memory_estimate(params: ModelParams) -> int:
    """Bytes needed to hold the environment and its CSR adjacency."""
    edges = expected_long_edge_count(params)
    return int(48 * edges + params.n_vertices * (8 + 16 * params.d) + (1 << 20))


def _lex_greater(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row-wise lexicographic (a > b, a == b)."""
    diff = a != b
    equal = ~diff.any(axis=1)
    first = np.argmax(diff, axis=1)
    rows = np.arange(a.shape[0])
    greater = a[rows, first] > b[rows, first]
    return greater & ~equal, equal


def displacement_classes(lattice: Lattice) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical displacement classes and a self-inverse mask.

    Torus: z ranges over the box (-L/2, L/2]^d and a class is kept when it is
    lexicographically larger than its wrapped negative; self-inverse classes
    (2z = 0 mod L) are kept and later restricted to x < x + z.
    Free boundary: z ranges over (-L, L)^d with first nonzero coordinate > 0.
    """
    d, L = lattice.d, lattice.L
    if lattice.is_torus:
        axis = np.arange(lattice.lo, lattice.hi + 1, dtype=np.int64)
    else:
        axis = np.arange(-(L - 1), L, dtype=np.int64)
    z = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    z = z[np.abs(z).sum(axis=1) > 0]
    if lattice.is_torus:
        greater, equal = _lex_greater(z, lattice.wrap(-z))
        keep = greater | equal
        return z[keep], equal[keep]
    greater, _ = _lex_greater(z, -z)
    return z[greater], np.zeros(int(greater.sum()), dtype=bool)


def class_sizes(lattice: Lattice, z: np.ndarray) -> np.ndarray:
    """Number of start vertices x with x + z inside the box, per class."""
    if lattice.is_torus:
        return np.full(z.shape[0], lattice.n, dtype=np.int64)
    return np.prod(lattice.L - np.abs(z), axis=1).astype(np.int64)


def class_keys(lattice: Lattice, z: np.ndarray) -> np.ndarray:
    """Nonnegative integer key of each displacement class."""
    span = 2 * lattice.L + 1
    key = np.zeros(z.shape[0], dtype=np.int64)
    for k in range(lattice.d):
        key = key * span + (z[:, k] + lattice.L)
    return key


def pairs_of_class(lattice: Lattice, z: np.ndarray, index: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map positions within a class to vertex pairs (x, x + z)."""
    index = np.asarray(index, dtype=np.int64)
    if lattice.is_torus:
        x = index
    else:
        dims = lattice.L - np.abs(z)
        offset = np.maximum(0, -z)
        coords = np.stack(np.unravel_index(index, tuple(int(v) for v in dims)), axis=-1)
        x = lattice.flat(coords + offset)
    y, _ = lattice.shift(x, np.broadcast_to(z, (x.size, lattice.d)))
    return x, y


def _unit_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size) + 2.0**-54


def skip_positions(rng: np.random.Generator, p: float, count: int) -> np.ndarray:
    """Success positions of ``count`` Bernoulli(p) trials via geometric gaps."""
    if p <= 0.0 or count <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(count, dtype=np.int64)
    log_q = np.log1p(-p)
    found: List[np.ndarray] = []
    last = -1.0
    while True:
        expected = (count - last) * p
        size = int(expected + 6.0 * np.sqrt(expected + 1.0) + 16)
        gaps = np.maximum(1.0, np.ceil(np.log(_unit_uniform(rng, size)) / log_q))
        pos = last + np.cumsum(gaps)
        inside = pos < count
        found.append(pos[inside].astype(np.int64))
        if not inside.all():
            break
        last = float(pos[-1])
    return np.concatenate(found)


def _skip_sparse(
    streams: StreamFactory, keys: np.ndarray, probs: np.ndarray, counts: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Advance all sparse classes together; returns (class slot, position)."""
    slots = np.arange(keys.size)
    log_q = np.log1p(-probs)
    pos = np.full(keys.size, -1.0)
    hit_slots: List[np.ndarray] = []
    hit_pos: List[np.ndarray] = []
    counter = 0
    active = slots[probs > 0]
    while active.size:
        u = streams.uniform(StreamRole.SKIP, keys[active], counter)
        gaps = np.maximum(1.0, np.ceil(np.log(u) / log_q[active]))
        pos[active] += gaps
        hit = pos[active] < counts[active]
        active = active[hit]
        hit_slots.append(active)
        hit_pos.append(pos[active].astype(np.int64))
        counter += 1
    if not hit_slots:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(hit_slots), np.concatenate(hit_pos)


def generate_environment(
    params: ModelParams,
    seed: int,
    method: str = "skip",
    memory_budget: Optional[int] = DEFAULT_MEMORY_BUDGET,
) -> Environment:
    """Generate an LRP environment.

    Args:
        params: Model parameters
        seed: 64-bit master seed
        method: ``skip`` (bulk) or ``hash`` (exact per-edge keyed, small boxes)
        memory_budget: Refuse generation above this many bytes (None disables)

    Returns:
        Environment whose edges are a pure function of (params, seed, method)
    """
    if method not in GENERATION_METHODS:
        raise DomainError(f"unknown generation method {method!r}")
    required = memory_estimate(params)
    if memory_budget is not None and required > memory_budget:
        raise BudgetError(required, memory_budget)
    lattice = Lattice.from_params(params)
    if method == "hash" and lattice.n > HASH_MAX_VERTICES:
        raise DomainError(
            f"hash generation is quadratic; L^d={lattice.n} exceeds {HASH_MAX_VERTICES}"
        )
    streams = StreamFactory(seed)
    z, self_inverse = displacement_classes(lattice)
    probs = pair_probability(z, params)
    counts = class_sizes(lattice, z)
    keys = class_keys(lattice, z)
    is_nn = np.abs(z).sum(axis=1) == 1
    if params.nn_prob_one:
        consider = ~is_nn
    else:
        consider = np.ones(z.shape[0], dtype=bool)

    found: List[Tuple[int, np.ndarray]] = []
    if method == "hash":
        for c in np.flatnonzero(consider & (probs > 0)):
            x, y = pairs_of_class(lattice, z[c], np.arange(counts[c]))
            hit = edge_uniform(seed, x, y) < probs[c]
            found.append((int(c), np.flatnonzero(hit)))
    else:
        dense = consider & (probs * counts >= 1.0)
        for c in np.flatnonzero(dense):
            rng = streams.generator(StreamRole.SKIP, int(keys[c]))
            found.append((int(c), skip_positions(rng, float(probs[c]), int(counts[c]))))
        sparse = np.flatnonzero(consider & ~dense)
        slot, pos = _skip_sparse(streams, keys[sparse], probs[sparse], counts[sparse])
        if slot.size:
            order = np.argsort(slot, kind="stable")
            slot, pos = slot[order], pos[order]
            bounds = np.flatnonzero(np.diff(slot)) + 1
            for chunk_slot, chunk_pos in zip(np.split(slot, bounds), np.split(pos, bounds)):
                found.append((int(sparse[chunk_slot[0]]), chunk_pos))

    long_src: List[np.ndarray] = []
    long_dst: List[np.ndarray] = []
    nn_open = None if params.nn_prob_one else np.zeros((lattice.n, params.d), dtype=bool)
    for c, positions in found:
        if positions.size == 0:
            continue
        x, y = pairs_of_class(lattice, z[c], positions)
        if self_inverse[c]:
            keep = x < y
            x, y = x[keep], y[keep]
        if is_nn[c]:
            axis = int(np.flatnonzero(z[c])[0])
            forward = z[c][axis] > 0
            nn_open[np.where(forward, x, y), axis] = True
        else:
            long_src.append(x)
            long_dst.append(y)
    if long_src:
        src, dst = np.concatenate(long_src), np.concatenate(long_dst)
    else:
        src = dst = np.empty(0, dtype=np.int64)
    return Environment(params, seed, src, dst, nn_open=nn_open, method=method)
