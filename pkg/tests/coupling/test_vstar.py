import numpy as np
import pytest

from src.coupling.geometric import side_indicator
from src.coupling.vstar import VStar, excursion_path, random_vstar_fixture, simulate_vstar
from src.utils.errors import DomainError, ModelViolationError
from src.walks.ball import LocalBall


def _stub(cap=1):
    """Root 0 -- 1 -- 2: p~ = 1/2 with cap 1."""
    return LocalBall.from_edges(3, [(0, 1), (1, 2)], cap=cap)


def test_vstar_indexing():
    vstar = VStar(_stub(), _stub())
    assert vstar.x == 3
    assert vstar.neighbors(0).tolist() == [1, 3]
    assert vstar.neighbors(3).tolist() == [4, 0]
    assert vstar.neighbors(5).tolist() == [4]
    assert vstar.local_index(2) == 2
    assert vstar.to_global(np.array([0, 4])).tolist() == [0, 1]


def test_caps_must_agree():
    with pytest.raises(DomainError):
        VStar(_stub(cap=1), _stub(cap=2))


def test_side_rule_and_geometric_counts():
    ball = _stub()
    assert ball.return_probability_exact().p == pytest.approx(0.5)
    report = simulate_vstar(ball, _stub(), 3000, np.random.default_rng(7))
    assert report.well_defined == 3000
    assert report.param_v == pytest.approx(1 / 3)
    assert report.side_rule_agreement == 1.0
    assert report.parity_agreement == 1.0
    assert report.ks_v < 0.05
    assert report.ks_x < 0.05


def test_random_fixtures_follow_the_side_rule():
    rng = np.random.default_rng(13)
    for _ in range(5):
        ball_v, ball_x = random_vstar_fixture(rng, cap=3)
        assert ball_v.return_probability_exact().p < 1.0
        report = simulate_vstar(ball_v, ball_x, 300, rng)
        assert report.side_rule_agreement == 1.0


def test_disconnected_ball_is_a_model_violation():
    broken = LocalBall.from_edges(3, [(0, 1)], cap=2)
    with pytest.raises(ModelViolationError):
        simulate_vstar(broken, _stub(cap=2), 10, np.random.default_rng(0))


@pytest.mark.parametrize("R_v,R_x", [(0, 0), (2, 1), (1, 3), (4, 4)])
def test_excursion_path_escapes_on_the_predicted_side(R_v, R_x):
    vstar = VStar(_stub(), _stub())
    ypath = excursion_path(vstar, R_v, R_x, 400, np.random.default_rng(R_v * 10 + R_x))
    assert ypath is not None and ypath.escaped_from is not None
    assert ypath.side == side_indicator(R_v, R_x)
    assert ypath.crossings == 2 * min(R_v, R_x) + ypath.side
    assert len(ypath.local) == 401
    for a, b in zip(ypath.local, ypath.local[1:]):
        assert b in vstar.neighbors(a)
