import numpy as np
import pytest

from src.estimators.marginals import marginal_compare
from src.estimators.rates import LocalTypes, new_vertex_rates
from src.estimators.returns import oracle_comparison, return_probabilities, sample_balls
from src.stable.samplers import stable_path
from src.utils.errors import DomainError
from src.utils.streams import StreamFactory
from src.walks.ball import LocalBall
from src.walks.engine import run_ensemble
from src.walks.path import rescale_path

from ..conftest import SEED


@pytest.fixture
def ring_paths(nn_only_env):
    return run_ensemble(nn_only_env, 0, 128, 20, StreamFactory(SEED))


def test_return_probabilities_on_ring(nn_only_env):
    capped = return_probabilities(nn_only_env, 5, 1, 2)
    assert capped.p == pytest.approx(1.0) and capped.degree == 2
    assert return_probabilities(nn_only_env, 5, 1, 0).p == 0.0
    absorbed = return_probabilities(nn_only_env, 5, 1, None, absorb_boundary=True)
    assert absorbed.p == pytest.approx(0.0)
    mc = return_probabilities(nn_only_env, 5, 1, 2, mode="monte-carlo", trials=200)
    assert mc.p == 1.0 and mc.trials == 200
    with pytest.raises(DomainError):
        return_probabilities(nn_only_env, 5, 1, 2, mode="spectral")


def test_oracle_agreement(plane_env):
    rng = np.random.default_rng(3)
    balls = sample_balls(plane_env, 5, 1, 4, rng)
    assert all(ball.size == 9 for ball in balls)
    report = oracle_comparison(balls, rng, trials=4000)
    assert report.agreement == 1.0
    assert report.to_report()["fixtures"] == 5


def test_oracle_rejects_large_balls():
    ball = LocalBall.from_edges(2001, [(i, i + 1) for i in range(2000)], cap=2)
    with pytest.raises(DomainError):
        oracle_comparison([ball], np.random.default_rng(0))


def test_local_types_are_cached(nn_only_env):
    types = LocalTypes(nn_only_env, [0.3, 0.6], ball_radius=1, cap=0)
    assert types.quantities(7) == (0.0, 2)
    assert types(7) == (1, 2)
    assert types._cache == {7: (1, 2)}
    assert LocalTypes(nn_only_env, [0.3, 0.6], ball_radius=1, cap=1)(7) == (0, 0)


def test_rates_with_a_single_type(ring_paths):
    report = new_vertex_rates(ring_paths, [0.5], lambda v: (1, 1), chi=1.0)
    assert report.t == 128 and report.walks == 20
    assert report.C_star == pytest.approx(np.mean(report.N_t) / 128)
    assert report.C_table == {"1,1": pytest.approx(report.C_star)}
    assert report.C_bar == 0.0
    assert report.rates() == {(1, 1): pytest.approx(report.C_star)}
    assert report.H_fraction == 1.0
    assert report.plateau_t[0] == 1 and report.plateau[0] == 1.0
    assert report.plateau_t[-1] == 128


def test_rates_overflow_bin(ring_paths):
    report = new_vertex_rates(ring_paths, [0.3, 0.6], lambda v: (0, 0), t=64)
    assert report.C_bar == pytest.approx(report.C_star)
    assert all(value == 0.0 for value in report.C_table.values())
    assert len(report.C_table) == 4


def test_rates_validation(ring_paths):
    with pytest.raises(DomainError):
        new_vertex_rates(ring_paths, [], lambda v: (1, 1))
    with pytest.raises(DomainError):
        new_vertex_rates([], [0.5], lambda v: (1, 1))
    with pytest.raises(DomainError):
        new_vertex_rates(ring_paths, [0.6, 0.3], lambda v: (1, 1))


def test_identical_ensembles_have_zero_distance(ring_paths):
    steps = [rescale_path(p, 0.5) for p in ring_paths]
    report = marginal_compare(steps, steps, t_list=(0.5, 1.0))
    assert report.ks_max == 0.0
    assert report.lq_mean == pytest.approx(0.0)
    assert len(report.rows) == 2
    assert report.ks_at(1.0) == 0.0
    assert report.to_report()["paths"] == 20


def test_marginals_against_stable_reference(ring_paths):
    rng = np.random.default_rng(9)
    steps = [rescale_path(p, 0.5) for p in ring_paths]
    reference = [stable_path(2.0, 1, np.linspace(0, 1, 129), rng) for _ in range(30)]
    report = marginal_compare(steps, reference, t_list=(0.25, 0.5, 1.0), q=1.0)
    assert [r.t for r in report.rows] == [0.25, 0.5, 1.0]
    assert report.reference_paths == 30
    assert report.lq_mean > 0


def test_marginal_validation(ring_paths):
    steps = [rescale_path(p, 0.5) for p in ring_paths]
    with pytest.raises(DomainError):
        marginal_compare(steps, steps, t_list=(0.0, 1.0))
    with pytest.raises(DomainError):
        marginal_compare(steps, steps, t_list=(1.5,))
    with pytest.raises(DomainError):
        marginal_compare(steps, [])
    plane = [stable_path(2.0, 2, np.linspace(0, 1, 9), np.random.default_rng(1))]
    with pytest.raises(DomainError):
        marginal_compare(steps, plane)
