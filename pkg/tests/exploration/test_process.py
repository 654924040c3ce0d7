import numpy as np
import pytest

from src.exploration.events import WalkEvents, event_scan, f_star_frequency
from src.exploration.process import read_transcript, run_exploration, write_transcript
from src.exploration.scales import scale_parameters
from src.exploration.state import ExplorationState, ExplorationView
from src.exploration.types import Phase
from src.percolation.generator import generate_environment
from src.percolation.model import ModelParams
from src.utils.errors import DomainError
from src.utils.streams import StreamFactory
from src.walks.engine import run_walk

from ..conftest import SEED

PARAMS = ModelParams(d=1, s=1.5, beta=1.0, L=256)


@pytest.fixture(scope="module")
def hash_env():
    return generate_environment(PARAMS, SEED, method="hash")


@pytest.fixture(scope="module")
def result():
    return run_exploration(PARAMS, SEED, 6, 2, sampler="hash", pilot_samples=100)


def _state(sampler="hash"):
    return ExplorationState(PARAMS, SEED, scale_parameters(8, PARAMS.s, PARAMS.d), sampler=sampler)


def test_near_field_matches_hash_environment(hash_env):
    state = _state()
    near = state.scales.near_radius
    for v in (0, 17, 255):
        nbrs = hash_env.neighbors(v)
        close = nbrs[hash_env.lattice.sup_distance(np.full(nbrs.size, v), nbrs) <= near]
        assert np.array_equal(state.near_neighbors(v), close)


def test_revealed_vertex_matches_hash_environment(hash_env):
    state = _state()
    for v in (3, 40, 41, 200):
        state.reveal(v)
        assert np.array_equal(state.neighbors(v), hash_env.neighbors(v))


def test_reveal_is_idempotent():
    state = _state()
    first = state.reveal(9)
    assert state.reveal(9) == []
    assert 9 in state.revealed
    for x in first:
        assert 9 in state.registry[x]


def test_unrevealed_vertex_has_no_full_neighbourhood():
    with pytest.raises(DomainError):
        _state().neighbors(5)


def test_unknown_sampler():
    with pytest.raises(DomainError):
        _state(sampler="dense")


def test_walk_on_lazy_view_matches_materialized(hash_env):
    streams = StreamFactory(SEED)
    lazy = run_walk(ExplorationView(_state()), 0, 400, streams, ell=2)
    full = run_walk(hash_env, 0, 400, streams, ell=2)
    assert np.array_equal(lazy.vertices, full.vertices)


def test_distance_to_revealed():
    state = _state()
    assert state.distance_to_revealed(10) == np.inf
    state.reveal(20)
    state.reveal(250)
    assert state.distance_to_revealed(10) == 10
    assert state.distance_to_revealed(10, exclude=[20]) == 16


def test_transcript_shape(result):
    assert len(result.walks) == 2
    for walk in result.walks:
        assert walk.n == 64
        assert walk.path.n_steps == 64
        assert set(np.unique(walk.B).tolist()) <= set(range(7))
        assert np.all(walk.phase[walk.A == 1] == Phase.MAIN)
    assert result.walks[0].N_j[0] >= 0


def test_first_steps_replay_the_environment(result, hash_env):
    """Outside special phases the walk follows its own stream on the full environment."""
    streams = StreamFactory(SEED)
    for walk in result.walks:
        replay = run_walk(hash_env, 0, 64, streams, ell=walk.ell)
        special = np.flatnonzero(walk.A)
        stop = int(special[0]) if special.size else 64
        assert np.array_equal(walk.path.vertices[: stop + 1], replay.vertices[: stop + 1])


def test_phi_counts_types(result):
    walk = result.walks[0]
    steps = walk.new_steps()
    j, m = int(walk.N_j[steps[0]]), int(walk.N_m[steps[0]])
    phi = walk.phi(j, m)
    assert phi[steps[0]] == 0
    assert phi[-1] == int(((walk.N_j[:-1] == j) & (walk.N_m[:-1] == m)).sum())


def test_exploration_is_deterministic(result):
    again = run_exploration(PARAMS, SEED, 6, 2, sampler="hash", pilot_samples=100)
    for a, b in zip(result.walks, again.walks):
        assert np.array_equal(a.path.vertices, b.path.vertices)
        assert np.array_equal(a.B, b.B)
    assert result.q_grid == again.q_grid


@pytest.mark.parametrize("compress", [False, True])
def test_transcript_round_trip(tmp_path, result, compress):
    suffix = ".jsonl.gz" if compress else ".jsonl"
    target = write_transcript(result, tmp_path / f"t{suffix}", compress)
    records = read_transcript(target)
    assert records[0]["type"] == "header"
    steps = [r for r in records if "i" in r and r.get("type") != "coupling"]
    couplings = [r for r in records if r.get("type") == "coupling"]
    assert len(steps) == 128
    assert len(couplings) == sum(len(w.couplings) for w in result.walks)
    assert {r["phase"] for r in steps} <= {"main", "special"}


def test_report_counts(result):
    report = result.to_report()
    assert report["walks"] == 2
    assert sum(report["code_counts"].values()) == sum(int((w.B > 0).sum()) for w in result.walks)


def test_events_vanish_without_long_edges(nn_only_env):
    scales = scale_parameters(6, s=1.5, d=1)
    paths = [run_walk(nn_only_env, 0, 64, StreamFactory(SEED), ell=e) for e in range(3)]
    report = event_scan(paths, nn_only_env, scales, error_free=[True, True, False])
    assert all(v == 0.0 for v in report.frequencies.values())
    assert report.f_star == 0.0 and report.pairs == 3
    assert report.coupling_success == pytest.approx(2 / 3)


def test_events_on_exploration_state(result):
    report = event_scan(result.paths, result.state, result.scales)
    assert report.walks == 2
    assert report.steps == 128
    assert all(0.0 <= v <= 1.0 for v in report.frequencies.values())


def test_f_star_frequency():
    walks = [
        WalkEvents(ell=i, steps=1, counts={}, unions={}, long_edges=edges)
        for i, edges in enumerate([[(1, 9)], [(1, 9), (2, 8)], [(3, 7)]])
    ]
    assert f_star_frequency(walks) == (pytest.approx(1 / 3), 3)
    assert f_star_frequency(walks, [(1, 2)]) == (0.0, 1)
