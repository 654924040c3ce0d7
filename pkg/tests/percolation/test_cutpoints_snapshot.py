import numpy as np
import pytest

from src.percolation.cutpoints import cutpoint_density, detect_cutpoints
from src.percolation.generator import Environment, generate_environment
from src.percolation.model import Boundary, ModelParams
from src.percolation.snapshot import format_snapshot, load_snapshot, save_snapshot
from src.utils.errors import ConfigError, DomainError, UnsupportedDimensionError

from ..conftest import SEED


def _ring(L, src, dst, boundary=Boundary.TORUS):
    params = ModelParams(d=1, s=2.0, L=L, boundary=boundary)
    return Environment(params, SEED, np.array(src), np.array(dst))


def test_every_vertex_is_a_cutpoint_without_long_edges(nn_only_env):
    cut = detect_cutpoints(nn_only_env)
    assert cut.count == 64
    assert cut.density() == 1.0


def test_long_edge_covers_its_endpoints():
    cut = detect_cutpoints(_ring(16, [2], [5]))
    assert cut.positions.tolist() == [0, 1] + list(range(6, 16))
    assert not cut.contains(2)
    assert cut.contains(6)


def test_seam_crossing_edge_covers_both_ends():
    cut = detect_cutpoints(_ring(16, [1], [14]))
    assert cut.positions.tolist() == list(range(2, 14))


def test_free_boundary_does_not_wrap():
    cut = detect_cutpoints(_ring(16, [1], [14], Boundary.FREE))
    assert cut.positions.tolist() == [0, 15]


def test_cutpoints_need_line():
    env = Environment(ModelParams(d=2, s=3.0, L=8), SEED, np.empty(0), np.empty(0))
    with pytest.raises(UnsupportedDimensionError):
        detect_cutpoints(env)


def test_cutpoints_need_forced_nearest_neighbours():
    params = ModelParams(d=1, s=2.5, L=32, nn_prob_one=False)
    with pytest.raises(DomainError):
        detect_cutpoints(generate_environment(params, SEED))


def test_cutpoint_density_is_positive_for_steep_tail():
    env = generate_environment(ModelParams(d=1, s=3.0, L=1 << 14), SEED)
    density = cutpoint_density(env, windows=4)
    assert density.shape == (4,)
    assert np.all(density > 0)


@pytest.mark.parametrize(
    "params",
    [
        ModelParams(d=1, s=2.5, L=128),
        ModelParams(d=2, s=3.0, L=16, norm="inf"),
        ModelParams(d=2, s=2.5, L=12, nn_prob_one=False, boundary="free"),
    ],
)
def test_snapshot_round_trip(tmp_path, params):
    env = generate_environment(params, SEED)
    loaded = load_snapshot(save_snapshot(env, tmp_path / "env.lrpenv"))
    assert loaded.params == env.params
    assert loaded.seed == env.seed
    assert np.array_equal(loaded.long_src, env.long_src)
    assert np.array_equal(loaded.long_dst, env.long_dst)
    assert np.array_equal(loaded.indices, env.indices)
    assert format_snapshot(loaded) == format_snapshot(env)


def test_snapshot_header(line_env):
    header = format_snapshot(line_env).splitlines()[0]
    assert header.startswith("LRPENV 1 d=1 s=2.5 beta=1.0 L=256 nn=1 norm=2 seed=")


def test_snapshot_rejects_foreign_file(tmp_path):
    target = tmp_path / "bad.lrpenv"
    target.write_text("GRAPH 2\n")
    with pytest.raises(ConfigError) as info:
        load_snapshot(target)
    assert info.value.line == 1
