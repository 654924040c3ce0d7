"""Cluster labelling by union-find."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .generator import Environment


class UnionFind:
    """Array-backed disjoint sets with path compression and union by rank.

    ``union_edges`` processes whole edge arrays at once by alternating
    pointer jumping and min-hooking of roots, which converges in a few rounds.
    """

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int8)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = int(self.parent[root])
        while self.parent[x] != root:
            self.parent[x], x = root, int(self.parent[x])
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1

    def compress(self) -> np.ndarray:
        parent = self.parent
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                return parent
            parent[:] = grand

    def union_edges(self, u: np.ndarray, v: np.ndarray) -> None:
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        while u.size:
            roots = self.compress()
            ru, rv = roots[u], roots[v]
            differ = ru != rv
            if not differ.any():
                break
            u, v, ru, rv = u[differ], v[differ], ru[differ], rv[differ]
            np.minimum.at(self.parent, np.maximum(ru, rv), np.minimum(ru, rv))
        self.compress()

    def labels(self) -> np.ndarray:
        return self.compress().copy()


class ClusterLabeling(BaseModel):
    """Partition of the vertex set into connected clusters."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    labels: np.ndarray = Field(..., description="Root label per vertex")
    sizes: List[int] = Field(..., description="Cluster sizes, descending")
    largest_label: int = Field(..., description="Label of the largest cluster")

    @property
    def n1(self) -> int:
        return self.sizes[0] if self.sizes else 0

    @property
    def n2(self) -> int:
        return self.sizes[1] if len(self.sizes) > 1 else 0

    @property
    def largest_mask(self) -> np.ndarray:
        return self.labels == self.largest_label

    def largest_fraction(self) -> float:
        return self.n1 / float(self.labels.size) if self.labels.size else 0.0

    def same_cluster(self, u: int, v: int) -> bool:
        return bool(self.labels[u] == self.labels[v])

    def to_report(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "clusters": len(self.sizes),
            "largest_fraction": self.largest_fraction(),
        }


def analyze_clusters(env: Environment) -> ClusterLabeling:
    """Union-find over every edge of ``env``."""
    uf = UnionFind(env.n_vertices)
    nu, nv = env.nearest_neighbor_edges()
    uf.union_edges(np.concatenate([nu, env.long_src]), np.concatenate([nv, env.long_dst]))
    labels = uf.labels()
    roots, counts = np.unique(labels, return_counts=True)
    order = np.argsort(-counts, kind="stable")
    return ClusterLabeling(
        labels=labels,
        sizes=[int(c) for c in counts[order]],
        largest_label=int(roots[order[0]]),
    )
