"""Reveal classification and special-phase flags on a bare ring with scripted far edges."""

import numpy as np
import pytest

from src.coupling.geometric import CouplingStreams
from src.coupling.vstar import YPath
from src.exploration import process
from src.exploration.process import _WalkRunner, reveal_long_edges, run_exploration
from src.exploration.scales import scale_parameters
from src.exploration.state import ExplorationState
from src.exploration.types import Phase
from src.percolation.generator import Environment
from src.percolation.model import ModelParams
from src.utils.streams import StreamFactory
from src.walks.engine import run_walk

from ..conftest import SEED

RING = ModelParams(d=1, s=1.5, beta=0.0, L=200)
Q_GRID = np.array([0.25, 0.5, 0.75])
V, X = 10, 60


class ScriptedState(ExplorationState):
    """Near field is the bare ring; far neighbours come from ``far``."""

    def __init__(self, far):
        scales = scale_parameters(3, s=1.5, d=1).model_copy(
            update={"rho": 2, "ball_radius": 2, "cap": 2, "special_length": 4, "near_radius": 4}
        )
        super().__init__(RING, SEED, scales, q_grid=Q_GRID, sampler="hash")
        self.far = far

    def _far_candidates_hash(self, v):
        return np.array(self.far.get(v, []), dtype=np.int64)


class Draws:
    """Stand-in generator for the excursion stream."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0) if self.values else 0.0

    def integers(self, n):
        return 0


class ScriptedStreams(CouplingStreams):
    def __init__(self, draws):
        super().__init__(SEED)
        self.draws = Draws(draws)

    def excursions(self, ell, i):
        return self.draws


@pytest.fixture
def scripted_y(monkeypatch):
    """Fix the sides and the V* walk Y (given as global vertices)."""

    def install(vertices, t0=1, sides=(2, 1, 1)):
        def excursion(vstar, R_v, R_x, length, rng, p_v=None, p_x=None):
            return YPath(local=[vstar.local_index(g) for g in vertices], t0=t0)

        monkeypatch.setattr(process, "side_from_streams", lambda *args: sides)
        monkeypatch.setattr(process, "excursion_path", excursion)

    return install


def _reveal(state, v=V):
    counters = {}
    out = reveal_long_edges(state, CouplingStreams(SEED), v, 1, counters)
    assert counters == {(out.j, out.m): 1}
    return out


def _run(far, draws=()):
    return _WalkRunner(ScriptedState(far), ScriptedStreams(draws), 1, V).run()


def test_clean_long_edge_opens_a_special_phase():
    out = _reveal(ScriptedState({V: [X]}))
    assert (out.case, out.A, out.B, out.x) == (3, 1, 0, X)
    assert out.d == out.d_x == 2


def test_two_long_edges_are_code_2():
    out = _reveal(ScriptedState({V: [X, 150]}))
    assert (out.case, out.B, out.A) == (2, 2, 0)
    assert out.x is None


def test_far_end_near_revealed_vertex_is_code_2():
    state = ScriptedState({V: [X]})
    state.reveal(X + 2)
    out = _reveal(state)
    assert (out.case, out.B) == (2, 2)
    assert X not in state.revealed


def test_extra_edge_at_far_end_is_code_3():
    state = ScriptedState({V: [X], X: [120]})
    out = _reveal(state)
    assert (out.case, out.B) == (2, 3)
    assert state.degree(X) == out.d_x + 2


def test_special_phase_covers_the_next_T_steps(scripted_y):
    scripted_y([V, X, X + 1, X + 2, X + 1, X + 2], t0=1)
    walk = _run({V: [X]})
    assert walk.A[0] == 1 and walk.A[1:].sum() == 0
    assert np.all(walk.phase[1:5] == Phase.SPECIAL)
    assert walk.phase[0] == Phase.MAIN and np.all(walk.phase[5:] == Phase.MAIN)
    assert walk.path.vertices[:6].tolist() == [V, X, X + 1, X + 2, X + 1, X + 2]
    record = walk.couplings[0]
    assert record.tau == 4 and record.tau_star == 3 and record.K
    assert not walk.B[:5].any()


def test_long_edge_inside_v_star_is_code_4(scripted_y):
    scripted_y([V, V + 1, V, X, X + 1, X + 2], t0=3)
    walk = _run({V: [X], V + 1: [150]})
    assert walk.B[1] == 4
    assert walk.path.vertices[2] == V


def test_leaving_v_star_is_code_5(scripted_y):
    scripted_y([V, V + 1, V + 2, V + 1, V, V - 1])
    walk = _run({V: [X]}, draws=[0.0, 0.0, 0.9])
    assert walk.B[2] == 5
    assert walk.path.vertices[3] == V + 3
    record = walk.couplings[0]
    assert record.tau == 2 and not record.K
    assert walk.B[3] == 0 and walk.B[4] == 6


def test_missing_event_K_is_code_6(scripted_y):
    scripted_y([V, X, X + 1, X + 2, X + 1, X + 2], t0=None)
    walk = _run({V: [X]})
    assert walk.couplings[0].tau_star is None
    assert walk.B[4] == 6 and not walk.B[:4].any()


def test_degenerate_root_is_code_6(scripted_y):
    scripted_y([V, X], sides=None)
    walk = _run({V: [X]})
    assert walk.couplings[0].degenerate
    assert walk.B[1] == 6
    assert np.all(walk.phase[1:5] == Phase.SPECIAL)


def test_exploration_without_long_edges_is_a_plain_walk():
    params = ModelParams(d=1, s=1.5, beta=0.0, L=256)
    result = run_exploration(params, SEED, 6, 2, q_grid=Q_GRID.tolist(), sampler="hash")
    ring = Environment(params, SEED, np.empty(0), np.empty(0))
    assert result.error_free
    assert all(v == 0 for v in result.code_counts().values())
    for walk in result.walks:
        assert walk.A.sum() == 0 and walk.B.sum() == 0
        replay = run_walk(ring, 0, 64, StreamFactory(SEED), ell=walk.ell)
        assert np.array_equal(walk.path.vertices, replay.vertices)
