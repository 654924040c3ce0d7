import numpy as np
import pytest

from src.coupling.derived import build_derived_processes, exchangeability_test, increment_variables
from src.coupling.geometric import CouplingStreams, TypePool
from src.coupling.kconstant import estimate_K, k_sequence, sigma_value
from src.exploration.process import run_exploration
from src.percolation.model import ModelParams
from src.utils.errors import DomainError

from ..conftest import SEED


@pytest.fixture(scope="module")
def result():
    params = ModelParams(d=1, s=1.5, beta=1.0, L=256)
    return run_exploration(params, SEED, 6, 3, sampler="hash", pilot_samples=100)


def test_sigma_of_identical_laws():
    """Two i.i.d. Geom(t): P(R > R~) = (1 - t / (2 - t)) / 2."""
    pool = TypePool(np.array([0.5]), np.array([1]))
    t = 1 / 3
    expected = 0.5 * (1 - t / (2 - t))
    assert sigma_value(0.5, 1, pool, 200_000, np.random.default_rng(2)) == pytest.approx(expected, abs=0.01)


def test_sigma_increases_with_return_probability():
    pool = TypePool(np.array([0.3, 0.6]), np.array([2, 3]))
    low = sigma_value(0.1, 2, pool, 100_000, np.random.default_rng(4))
    high = sigma_value(0.8, 2, pool, 100_000, np.random.default_rng(4))
    assert high > low


def test_estimate_K_skips_zero_rates():
    pool = TypePool(np.array([0.2, 0.4, 0.6]), np.array([1, 2, 2]))
    report = estimate_K([0.3, 0.7], pool, {}, trials=100)
    assert report.K_J == 0.0
    assert report.sigma_table == [[0.0, 0.0], [0.0, 0.0]]
    single = estimate_K([0.3, 0.7], pool, {(1, 1): 2.0}, trials=20_000, streams=CouplingStreams(1))
    assert single.K_J == pytest.approx(2.0 * single.sigma_table[0][0])
    assert single.psi_J == pytest.approx(1 / 0.3 - 1 / 0.7)


def test_estimate_K_validates():
    pool = TypePool(np.array([0.2]), np.array([1]))
    with pytest.raises(DomainError):
        estimate_K([0.7, 0.3], pool, {})
    with pytest.raises(DomainError):
        estimate_K([0.3], pool, {}, trials=0)


def test_k_sequence_brackets(tmp_path):
    rng = np.random.default_rng(8)
    pool = TypePool(rng.uniform(0.05, 0.9, size=400), rng.integers(1, 4, size=400))
    seq = k_sequence(pool, [2, 4], lambda grid: {(1, 1): 0.1, (2, 2): 0.05}, trials=5000)
    assert [r.J for r in seq.reports] == [2, 4]
    assert len(seq.brackets) == 1 and seq.brackets[0]["J"] == 2
    assert seq.K == seq.reports[-1].K_J
    written = seq.reports[0].write(tmp_path / "k2.json")
    assert written.read_text().startswith("{")


def test_increment_bounds_bracket_sigma(result):
    streams = CouplingStreams(result.seed)
    q = np.asarray(result.q_grid)
    for walk in result.walks:
        inc = increment_variables(walk, streams, q)
        assert inc.steps.size == inc.sigma.size == inc.offsets.shape[0]
        assert np.all(inc.sigma_minus <= inc.sigma)
        assert np.all(inc.sigma <= inc.sigma_plus)
        assert set(np.unique(inc.sigma).tolist()) <= {0, 1}


def test_derived_processes_need_rates(result):
    with pytest.raises(DomainError):
        build_derived_processes(result, None)


def test_derived_processes_shapes(result):
    pool = TypePool(*result.state.pilot_types(50))
    report = build_derived_processes(result, {(1, 1): 0.05}, pool=pool, allow_flagged=True)
    assert len(report.paths) == 3 and report.skipped == []
    for paths in report.paths:
        assert paths.X.shape == paths.X_hat.shape == paths.X_frak.shape == (65, 1)
        assert np.all(paths.X_hat[0] == 0)
        assert paths.main_phase_gap() >= 0.0
    assert len(report.lq_hat_vs_walk) == 3
    assert report.to_report()["walks"] == 3


def test_flagged_walks_are_skipped(result):
    pool = TypePool(*result.state.pilot_types(50))
    report = build_derived_processes(result, {}, pool=pool)
    flagged = [w.ell for w in result.walks if not w.error_free]
    assert report.skipped == flagged
    for paths in report.paths:
        assert not paths.X_frak.any()


def test_exchangeability_of_constant_paths():
    paths = [np.zeros((33, 1), dtype=np.int64) for _ in range(4)]
    assert exchangeability_test(paths) == 1.0
    assert exchangeability_test([]) is None
