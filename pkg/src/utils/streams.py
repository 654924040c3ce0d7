"""Keyed random streams.

Two schemes are provided:

* ``StreamFactory.generator(role, *index)`` returns an independent numpy
  ``Generator`` whose state is a pure function of ``(seed, role, index...)``.
  Ensembles, Monte Carlo trials and coupling variables draw from these, so the
  order in which work is scheduled never changes a result.
* ``hash_uniform(seed, *keys)`` maps integer keys to uniforms in (0, 1) through
  a splitmix64 chain. It is vectorized over numpy arrays and is used where one
  uniform per object (e.g. per edge) must be recomputable from the key alone.
"""

from enum import IntEnum
from typing import Union

import numpy as np

ArrayLike = Union[int, np.ndarray]

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class StreamRole(IntEnum):
    """Roles separating the stream families of one master seed."""

    EDGE = 1
    SKIP = 2
    WALK = 3
    GEOM_R = 4
    GEOM_R_TILDE = 5
    TYPE = 6
    FAR_EDGES = 7
    SPECIAL_FAR_EDGES = 8
    VSTAR = 9
    STABLE = 10
    REFERENCE = 11
    MONTE_CARLO = 12
    BOOTSTRAP = 13
    EXCURSION = 14


def splitmix64(x: ArrayLike) -> np.ndarray:
    """Apply the splitmix64 finalizer elementwise (wrapping uint64 arithmetic)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _as_u64(key: ArrayLike) -> np.ndarray:
    return np.asarray(key, dtype=np.int64).astype(np.uint64)


def hash_u64(seed: int, *keys: ArrayLike) -> np.ndarray:
    """Chain splitmix64 over the seed and each key; broadcasts across keys."""
    h = splitmix64(np.uint64(int(seed) & _MASK64))
    for key in keys:
        h = splitmix64(h ^ _as_u64(key))
    return h


def hash_uniform(seed: int, *keys: ArrayLike) -> np.ndarray:
    """Uniform in (0, 1) from the top 53 bits of the keyed hash."""
    h = hash_u64(seed, *keys)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def keyed_generator(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for ``(seed, key...)``."""
    sequence = np.random.SeedSequence(
        entropy=int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key)
    )
    return np.random.Generator(np.random.Philox(sequence))


class StreamFactory:
    """Hands out keyed generators and hashed uniforms for one master seed."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64

    def generator(self, role: StreamRole, *index: int) -> np.random.Generator:
        return keyed_generator(self.seed, int(role), *index)

    def uniform(self, role: StreamRole, *keys: ArrayLike) -> np.ndarray:
        return hash_uniform(self.seed, int(role), *keys)

    def child_seed(self, role: StreamRole, *index: int) -> int:
        """Derive a 64-bit seed, e.g. for one environment of an ensemble."""
        return int(hash_u64(self.seed, int(role), *index))
