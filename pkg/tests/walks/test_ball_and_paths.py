import numpy as np
import pytest
import scipy.sparse as sp

from src.utils.errors import DomainError, ModelViolationError
from src.utils.streams import StreamFactory
from src.walks.ball import LocalBall, hitting_probability
from src.walks.engine import run_walk
from src.walks.path import Interpolation, PathNorm, StepFunction, lq_distance, rescale_path

from ..conftest import SEED


def _step(values, mode=Interpolation.STEP):
    values = np.asarray(values, dtype=float).reshape(len(values), -1)
    return StepFunction(n=values.shape[0] - 1, a=1.0, values=values, mode=mode)


def test_gamblers_ruin():
    n = 5
    rows, cols = [], []
    for i in range(n):
        for j in (i - 1, i + 1):
            if 0 <= j < n:
                rows.append(i)
                cols.append(j)
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    P = sp.diags(1.0 / np.asarray(A.sum(axis=1)).ravel()) @ A
    h = hitting_probability(P, [4], [0])
    assert h == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])


def test_exact_return_with_exit():
    ball = LocalBall.from_edges(3, [(0, 1), (0, 2), (1, 2)], exits=[2])
    assert ball.return_probability_exact().p == pytest.approx(0.25)
    capped = LocalBall.from_edges(3, [(0, 1), (0, 2), (1, 2)], exits=[2], cap=1)
    assert capped.return_probability_exact().p == pytest.approx(0.25)


def test_return_is_certain_on_finite_ball():
    ball = LocalBall.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert ball.return_probability_exact().p == pytest.approx(1.0)


def test_zero_cap_never_returns():
    ball = LocalBall.from_edges(2, [(0, 1)], cap=0)
    assert ball.return_probability_exact().p == 0.0


def test_isolated_root():
    ball = LocalBall.from_edges(2, [], cap=3)
    est = ball.return_probability_exact()
    assert est.isolated and est.p == 1.0 and est.degree == 0


def test_root_cannot_exit():
    with pytest.raises(DomainError):
        LocalBall.from_edges(2, [(0, 1)], exits=[0])


def test_disconnected_ball():
    with pytest.raises(ModelViolationError):
        LocalBall.from_edges(3, [(0, 1)]).check_connected()


def test_monte_carlo_agrees_with_exact():
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]
    ball = LocalBall.from_edges(5, edges, exits=[4], cap=6)
    exact = ball.return_probability_exact().p
    est = ball.return_probability_mc(np.random.default_rng(11), trials=20_000)
    assert est.ci_low - 0.01 <= exact <= est.ci_high + 0.01


def test_ball_from_environment(plane_env):
    ball = LocalBall.from_view(plane_env, 0, radius=2, cap=8)
    assert ball.size == 25
    assert ball.to_global[0] == 0
    assert ball.root_degree >= 4
    ball.check_connected()


def test_excursion_outcomes():
    ball = LocalBall.from_edges(3, [(0, 1), (1, 2)], exits=[2], cap=50)
    rng = np.random.default_rng(5)
    for _ in range(20):
        path, how = ball.sample_excursion(rng)
        assert path[0] == 0
        assert how in ("return", "exit")


def test_lq_distance_of_constants():
    assert lq_distance(_step([0, 0, 0]), _step([1, 1, 1])) == pytest.approx(1.0)


def test_lq_distance_linear_is_exact():
    f = _step([0, 1], Interpolation.LINEAR)
    g = _step([0, 0], Interpolation.LINEAR)
    assert lq_distance(f, g, q=2.0) == pytest.approx((1 / 3) ** 0.5)
    assert lq_distance(f, g, q=1.0) == pytest.approx(0.5)


def test_lq_distance_two_dimensional_linear():
    f = StepFunction(n=1, a=1.0, values=np.array([[0.0, 0.0], [1.0, 1.0]]), mode=Interpolation.LINEAR)
    g = StepFunction(n=1, a=1.0, values=np.zeros((2, 2)), mode=Interpolation.LINEAR)
    assert lq_distance(f, g, 2.0, PathNorm.SUP) == pytest.approx((1 / 3) ** 0.5, rel=1e-6)
    assert lq_distance(f, g, 2.0, PathNorm.EUCLIDEAN) == pytest.approx((2 / 3) ** 0.5, rel=1e-6)


def test_lq_distance_merges_grids():
    f = _step([0, 1])
    g = _step([0, 0, 0, 0])
    assert lq_distance(f, g, q=1.0) == pytest.approx(0.0)
    h = _step([1, 1, 0, 0, 0])
    assert lq_distance(_step([0, 0]), h, q=1.0) == pytest.approx(0.5)


def test_lq_distance_rejects_small_q():
    with pytest.raises(DomainError):
        lq_distance(_step([0, 1]), _step([0, 1]), q=0.5)


def test_rescale_path(nn_only_env):
    path = run_walk(nn_only_env, 0, 64, StreamFactory(SEED))
    fn = rescale_path(path, 0.5)
    assert fn.values.shape == (65, 1)
    assert fn(np.array([1.0]))[0, 0] == pytest.approx(path.displacement()[64, 0] / 8.0)
    with pytest.raises(DomainError):
        rescale_path(path, 0.0)
    with pytest.raises(DomainError):
        rescale_path(path, 0.5, n=65)
