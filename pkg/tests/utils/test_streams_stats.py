import numpy as np
import pytest

from src.utils.errors import DomainError
from src.utils.reporting import StageLogger
from src.utils.stats import dyadic_grid, ks_against_geometric, wilson_interval
from src.utils.streams import StreamFactory, StreamRole, hash_uniform


def test_generators_are_keyed():
    a = StreamFactory(5).generator(StreamRole.WALK, 3).random(4)
    b = StreamFactory(5).generator(StreamRole.WALK, 3).random(4)
    c = StreamFactory(5).generator(StreamRole.WALK, 4).random(4)
    d = StreamFactory(5).generator(StreamRole.SKIP, 3).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_hash_uniform_broadcasts():
    keys = np.arange(10_000)
    u = hash_uniform(11, 2, keys)
    assert u.shape == (10_000,)
    assert np.all((u > 0) & (u < 1))
    assert u[17] == hash_uniform(11, 2, 17)
    assert abs(u.mean() - 0.5) < 0.01


def test_child_seeds_differ():
    streams = StreamFactory(1)
    seeds = {streams.child_seed(StreamRole.MONTE_CARLO, 0, i) for i in range(100)}
    assert len(seeds) == 100


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    with pytest.raises(DomainError):
        wilson_interval(0, 0)


def test_dyadic_grid():
    assert dyadic_grid(3, 6) == [8, 16, 32, 64]
    assert dyadic_grid(2, 8, step=3) == [4, 32, 256]
    with pytest.raises(DomainError):
        dyadic_grid(5, 4)


def test_geometric_ks_of_exact_sample():
    t = 0.5
    samples = np.repeat(np.arange(4), [512, 256, 128, 64])
    assert ks_against_geometric(samples, t) < 0.07
    assert ks_against_geometric(np.array([], dtype=int), t) == 0.0


def test_stage_logger_records(capsys):
    logger = StageLogger("toy", verbose=True)
    logger.start("load", size=3)
    logger.finish("load", rows=2)
    logger.start("fit")
    logger.warn("few samples")
    logger.mark_interrupted()
    assert [(r.stage, r.status) for r in logger.records] == [("load", "ok"), ("fit", "failed")]
    assert logger.records[0].details == {"size": 3, "rows": 2}
    assert logger.warnings == ["few samples"]
    assert "toy: WARNING few samples" in capsys.readouterr().err
