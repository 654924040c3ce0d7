import numpy as np
import pytest
from scipy import stats

from src.percolation.model import ModelParams, pair_probability
from src.stable.reference import (
    ReferenceJumpLaw,
    discrete_reference_path,
    reference_endpoints,
    total_jump_statistic,
)
from src.stable.samplers import (
    calibrate_scale,
    dump_samples,
    positive_stable,
    sample_isotropic_increment,
    sample_stable_1d,
    stable_path,
)
from src.utils.errors import DomainError


def test_gaussian_case():
    x = sample_stable_1d(2.0, 50_000, np.random.default_rng(0))
    assert np.var(x) == pytest.approx(2.0, rel=0.05)


def test_cauchy_case():
    x = sample_stable_1d(1.0, 20_000, np.random.default_rng(1), scale=2.0)
    assert stats.kstest(x, stats.cauchy(scale=2.0).cdf).pvalue > 0.001


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.6, 1.5])
def test_matches_scipy_levy_stable(alpha):
    x = sample_stable_1d(alpha, 5000, np.random.default_rng(2))
    assert stats.kstest(x, stats.levy_stable(alpha, 0.0).cdf).pvalue > 0.001


def test_alpha_domain():
    rng = np.random.default_rng(0)
    for alpha in (0.0, 2.5):
        with pytest.raises(DomainError):
            sample_stable_1d(alpha, 10, rng)
    with pytest.raises(DomainError):
        positive_stable(1.5, 10, rng)


def test_isotropic_marginal_is_one_dimensional_stable():
    rng = np.random.default_rng(3)
    vec = sample_isotropic_increment(1.5, 2, rng, size=20_000)
    line = sample_stable_1d(1.5, 20_000, rng)
    assert vec.shape == (20_000, 2)
    assert stats.ks_2samp(vec[:, 0], line).pvalue > 0.001
    assert sample_isotropic_increment(1.5, 3, rng).shape == (3,)


def test_stable_path_grid():
    rng = np.random.default_rng(4)
    path = stable_path(1.5, 1, np.linspace(0, 1, 9), rng)
    values = path.values()
    assert values.shape == (9, 1)
    assert np.all(values[0] == 0)
    assert np.array_equal(path.at(0.3), values[2])
    assert np.array_equal(path.at(1.0), values[8])
    step = path.to_step_function()
    assert step.n == 8 and step.a == pytest.approx(1 / 1.5)
    with pytest.raises(DomainError):
        stable_path(1.5, 1, [0.0, 0.5, 0.5], rng)
    with pytest.raises(DomainError):
        stable_path(1.5, 1, [0.0, 0.1, 1.0], rng).to_step_function()


def test_calibration_recovers_scale():
    rng = np.random.default_rng(5)
    sample = sample_stable_1d(1.2, 40_000, rng, scale=3.0)
    report = calibrate_scale(sample, 1.2, rng)
    assert report.scale == pytest.approx(3.0, rel=0.05)
    with pytest.raises(DomainError):
        calibrate_scale(np.zeros(10), 1.2, rng)


def test_dump_samples(tmp_path):
    target = dump_samples(np.array([[1.0, 2.0], [3.0, 4.0]]), tmp_path / "s.csv")
    assert target.read_text().splitlines() == ["x1,x2", "1.0,2.0", "3.0,4.0"]


def test_reference_law_domain():
    with pytest.raises(DomainError):
        ReferenceJumpLaw(ModelParams(d=1, s=2.5, L=16), 100)
    with pytest.raises(DomainError):
        ReferenceJumpLaw(ModelParams(d=1, s=1.5, L=16), 0)


def test_reference_jumps_one_dimension():
    law = ReferenceJumpLaw(ModelParams(d=1, s=1.5, L=16), 1 << 20, table_max=1024)
    assert 0 < law.tail_fraction < 1
    jumps = law.sample(np.random.default_rng(6), 50_000)[:, 0]
    assert np.all((np.abs(jumps) >= 1) & (np.abs(jumps) <= 1 << 20))
    assert abs(np.mean(jumps > 0) - 0.5) < 0.01
    assert np.any(np.abs(jumps) > 1024)


def test_reference_jumps_plane():
    law = ReferenceJumpLaw(ModelParams(d=2, s=2.5, L=16), 512)
    jumps = law.sample(np.random.default_rng(7), 2000)
    sup = np.abs(jumps).max(axis=1)
    assert jumps.shape == (2000, 2)
    assert np.all((sup >= 1) & (sup <= 512))


def test_discrete_reference_path():
    params = ModelParams(d=1, s=1.5, L=16)
    path = discrete_reference_path(params, 100, np.random.default_rng(8), r_max=4096)
    assert path.n_steps == 100
    assert np.array_equal(np.abs(np.diff(path.positions[:, 0])), path.jumps)
    with pytest.raises(DomainError):
        discrete_reference_path(params, 0, np.random.default_rng(8))


@pytest.mark.slow
def test_reference_endpoints_are_self_similar():
    params = ModelParams(d=1, s=1.5, L=16)
    rng = np.random.default_rng(9)
    small = reference_endpoints(params, 256, 4000, rng)
    large = reference_endpoints(params, 2048, 4000, rng)
    ratio = np.median(np.abs(large)) / np.median(np.abs(small))
    assert 0.85 < ratio < 1.15


def _expected_total(params, n, r_max):
    """n^{-1/alpha} n sum_x |x| P(|x|) over the window, by enumeration."""
    axis = np.arange(-r_max, r_max + 1)
    z = np.stack(np.meshgrid(*([axis] * params.d), indexing="ij"), axis=-1).reshape(-1, params.d)
    z = z[np.abs(z).sum(axis=1) > 0]
    lengths = np.sqrt((z.astype(float) ** 2).sum(axis=1))
    return n * float((lengths * pair_probability(z, params)).sum()) / n ** (1.0 / params.alpha)


def test_total_jump_statistic_counts_forced_neighbours():
    params = ModelParams(d=1, s=1.8, L=16)
    n = 64
    out = total_jump_statistic(params, n, 2000, np.random.default_rng(11), r_max=1 << 12)
    assert out.shape == (2000,)
    assert out.min() >= 2 * n * n ** (-1 / 0.8) - 1e-12


@pytest.mark.parametrize(
    "params, r_max",
    [
        (ModelParams(d=1, s=1.8, L=16), 64),
        (ModelParams(d=1, s=1.5, beta=2.0, nn_prob_one=False, L=16), 64),
        (ModelParams(d=2, s=2.5, L=16), 8),
    ],
)
def test_total_jump_statistic_mean(params, r_max):
    n = 16
    out = total_jump_statistic(params, n, 4000, np.random.default_rng(12), r_max=r_max)
    se = out.std() / np.sqrt(out.size)
    assert abs(out.mean() - _expected_total(params, n, r_max)) < 5 * se


def test_total_jump_statistic_exceeds_largest_jump():
    params = ModelParams(d=1, s=1.5, L=16)
    totals = total_jump_statistic(params, 64, 3000, np.random.default_rng(13), r_max=1 << 16)
    jumps = np.abs(ReferenceJumpLaw(params, 1 << 16).sample(np.random.default_rng(14), 64 * 3000))
    largest = jumps.reshape(3000, 64).max(axis=1) / 64 ** (1 / 0.5)
    assert np.median(totals) > np.median(largest)


def test_total_jump_statistic_rejects_bad_input():
    with pytest.raises(DomainError):
        total_jump_statistic(ModelParams(d=1, s=1.5, L=16), 0, 10, np.random.default_rng(0))
    with pytest.raises(DomainError):
        total_jump_statistic(ModelParams(d=1, s=2.5, L=16), 8, 10, np.random.default_rng(0))
