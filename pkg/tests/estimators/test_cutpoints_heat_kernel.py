import numpy as np
import pytest

from src.estimators.cutpoint_chain import cutpoint_chain
from src.estimators.heat_kernel import heat_kernel_exponent, is_bipartite
from src.percolation.generator import Environment
from src.percolation.model import ModelParams
from src.utils.errors import DomainError, ModelViolationError
from src.utils.streams import StreamFactory

from ..conftest import SEED


def test_ring_chain_is_simple_random_walk(nn_only_env):
    """Every vertex of a bare ring is a cutpoint; the chain is SRW and K* = 1."""
    chain = cutpoint_chain(nn_only_env)
    assert chain.cutpoints.size == 64
    assert np.allclose(chain.Q_up, 0.5) and np.allclose(chain.Q_down, 0.5)
    assert np.allclose(chain.Q_stay, 0.0)
    assert chain.K_star == pytest.approx(1.0)
    assert chain.mean_spacing == pytest.approx(2.0)
    assert chain.time_fraction == pytest.approx(1.0)
    report = chain.to_report()
    assert report["symmetric"] and report["resistance_violations"] == 0
    assert report["y_diffusivity"] is None


def test_chain_simulation_matches_K_star(nn_only_env):
    chain = cutpoint_chain(nn_only_env, y_steps=100, y_chains=4000, walk_steps=32, walks=50)
    assert chain.y_diffusivity == pytest.approx(chain.K_star, rel=0.15)
    assert chain.walk_diffusivity is not None


def test_chain_with_long_edges(line_env):
    chain = cutpoint_chain(line_env)
    assert chain.symmetry_error < 1e-8
    assert chain.resistance_violations == 0
    assert np.all(chain.spacings >= 1.0)
    assert chain.K_star > 0


def test_single_shortcut_gap_matches_hand_solution():
    """Edge {10, 15} on a ring of 32 leaves the gap 10..15 between cutpoints 9 and 16."""
    env = Environment(ModelParams(d=1, s=2.0, beta=0.0, L=32), SEED, np.array([10]), np.array([15]))
    chain = cutpoint_chain(env)
    assert chain.cutpoints.tolist() == list(range(10)) + list(range(16, 32))
    # h(u) = P_u(hit 16 before 9) on the six gap vertices
    P = np.zeros((6, 6))
    b = np.zeros(6)
    for u, nbrs in enumerate([[9, 11, 15], [10, 12], [11, 13], [12, 14], [13, 15], [14, 16, 10]]):
        for w in nbrs:
            if w == 16:
                b[u] += 1 / len(nbrs)
            elif w != 9:
                P[u, w - 10] += 1 / len(nbrs)
    h = np.linalg.solve(np.eye(6) - P, b)
    assert h[0] == pytest.approx(6 / 17)
    j = 9
    assert chain.Q_up[j] == pytest.approx(h[0] / 2)
    assert chain.Q_up[j] == pytest.approx(3 / 17)
    assert chain.Q_down[j] == pytest.approx((1 - h[5]) / 2)
    assert chain.spacings[j] == pytest.approx(17 / 3)
    assert chain.Q_stay[j - 1] == pytest.approx(11 / 34)
    assert chain.Q_stay[j] == pytest.approx(11 / 34)
    assert np.allclose(np.delete(chain.Q_up, j), 0.5)


def test_chain_needs_forced_nearest_neighbours():
    params = ModelParams(d=1, s=2.0, beta=0.0, nn_prob_one=False, L=64)
    env = Environment(params, SEED, np.empty(0), np.empty(0))
    with pytest.raises(ModelViolationError):
        cutpoint_chain(env)


def test_chain_needs_two_cutpoints():
    params = ModelParams(d=1, s=2.0, beta=0.0, L=8)
    env = Environment(params, SEED, np.array([0, 2, 4, 6]), np.array([2, 4, 6, 0]))
    with pytest.raises(DomainError):
        cutpoint_chain(env)


def test_ring_is_bipartite(nn_only_env):
    assert is_bipartite(nn_only_env)
    odd = Environment(ModelParams(d=1, s=2.0, beta=0.0, L=63), SEED, np.empty(0), np.empty(0))
    assert not is_bipartite(odd)


def test_exact_heat_kernel_on_ring(nn_only_env):
    report = heat_kernel_exponent(nn_only_env, 0, [3, 4, 8, 16, 32, 64])
    assert report.bipartite
    assert report.t_grid == [4, 8, 16, 32, 64]
    assert report.slope == pytest.approx(-0.5, abs=0.05)
    assert report.returns[0] == pytest.approx(6 / 16)


def test_monte_carlo_heat_kernel_on_ring(nn_only_env):
    report = heat_kernel_exponent(
        nn_only_env, 0, [8, 16, 32, 64], mode="monte-carlo", trials=4000, streams=StreamFactory(SEED)
    )
    assert report.trials == 4000
    assert report.slope == pytest.approx(-0.5, abs=0.1)


def test_heat_kernel_rejects_bad_input(nn_only_env):
    with pytest.raises(DomainError):
        heat_kernel_exponent(nn_only_env, 0, [4, 8], mode="spectral")
    with pytest.raises(DomainError):
        heat_kernel_exponent(nn_only_env, 0, [3, 5, 8])
