import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components

from src.percolation.clusters import UnionFind, analyze_clusters
from src.percolation.generator import (
    displacement_classes,
    generate_environment,
    skip_positions,
)
from src.percolation.model import Boundary, Lattice, ModelParams, expected_long_edge_count
from src.utils.errors import BudgetError, DomainError

from ..conftest import SEED


def test_same_seed_same_environment(line_params):
    a = generate_environment(line_params, SEED)
    b = generate_environment(line_params, SEED)
    assert np.array_equal(a.long_src, b.long_src)
    assert np.array_equal(a.long_dst, b.long_dst)


def test_different_seeds_differ(line_params):
    a = generate_environment(line_params, SEED)
    b = generate_environment(line_params, SEED + 1)
    assert not (np.array_equal(a.long_src, b.long_src) and np.array_equal(a.long_dst, b.long_dst))


def test_long_edges_are_canonical_and_not_nearest(plane_env):
    assert np.all(plane_env.long_src < plane_env.long_dst)
    lat = plane_env.lattice
    l1 = np.abs(lat.displacement(plane_env.long_src, plane_env.long_dst)).sum(axis=1)
    assert np.all(l1 > 1)


def test_adjacency_is_symmetric(plane_env):
    adj = plane_env.csr()
    assert (adj != adj.T).nnz == 0
    assert adj.diagonal().sum() == 0


def test_degree_counts_nearest_neighbours(nn_only_env):
    assert np.all(nn_only_env.degrees == 2)
    assert nn_only_env.has_edge(0, 63)
    assert not nn_only_env.has_edge(0, 2)


@pytest.mark.parametrize("method", ["skip", "hash"])
def test_mean_long_edge_count(method):
    params = ModelParams(d=1, s=2.5, beta=1.0, L=256)
    counts = [generate_environment(params, seed, method=method).long_edge_count for seed in range(40)]
    expected = expected_long_edge_count(params)
    assert abs(np.mean(counts) - expected) < 5 * np.sqrt(expected / len(counts))


def test_hash_method_is_monotone_in_beta():
    low = generate_environment(ModelParams(d=1, s=2.2, beta=0.5, L=128), SEED, method="hash")
    high = generate_environment(ModelParams(d=1, s=2.2, beta=2.0, L=128), SEED, method="hash")
    low_pairs = set(zip(low.long_src.tolist(), low.long_dst.tolist()))
    high_pairs = set(zip(high.long_src.tolist(), high.long_dst.tolist()))
    assert low_pairs <= high_pairs


def test_hash_method_refuses_large_boxes():
    with pytest.raises(DomainError):
        generate_environment(ModelParams(d=1, s=2.5, L=1 << 15), SEED, method="hash")


def test_unknown_method():
    with pytest.raises(DomainError):
        generate_environment(ModelParams(d=1, s=2.5, L=64), SEED, method="dense")


def test_memory_budget_is_enforced():
    with pytest.raises(BudgetError) as info:
        generate_environment(ModelParams(d=2, s=3.0, L=64), SEED, memory_budget=1024)
    assert info.value.budget_bytes == 1024


def test_displacement_classes_cover_each_pair_once():
    lat = Lattice(1, 8)
    z, self_inverse = displacement_classes(lat)
    assert sorted(z[:, 0].tolist()) == [1, 2, 3, 4]
    assert self_inverse.tolist() == [z[i, 0] == 4 for i in range(z.shape[0])]


def test_free_boundary_classes_are_half_space():
    lat = Lattice(2, 4, Boundary.FREE)
    z, _ = displacement_classes(lat)
    assert z.shape[0] == (7 * 7 - 1) // 2


def test_skip_positions_rate():
    rng = np.random.default_rng(3)
    pos = skip_positions(rng, 0.01, 1_000_000)
    assert np.all(np.diff(pos) > 0)
    assert pos.max() < 1_000_000
    assert abs(pos.size - 10_000) < 500


def test_union_find_matches_scipy():
    params = ModelParams(d=2, s=2.5, beta=0.8, L=24, nn_prob_one=False)
    env = generate_environment(params, SEED)
    labels = analyze_clusters(env)
    count, ref = connected_components(env.csr(), directed=False)
    assert len(labels.sizes) == count
    assert labels.n1 == np.bincount(ref).max()
    for u, v in [(0, 1), (5, 300), (17, 400)]:
        assert labels.same_cluster(u, v) == (ref[u] == ref[v])


def test_forced_torus_is_one_cluster(plane_env):
    labels = analyze_clusters(plane_env)
    assert labels.n1 == plane_env.n_vertices
    assert labels.n2 == 0
    assert labels.largest_fraction() == 1.0


def test_union_find_scalar_ops():
    uf = UnionFind(5)
    uf.union(0, 3)
    uf.union(3, 4)
    assert uf.find(4) == uf.find(0)
    assert uf.find(1) != uf.find(0)
