import numpy as np
import pytest

from src.coupling.geometric import (
    CouplingStreams,
    GeomStream,
    TypePool,
    excursion_parameter,
    excursion_parameters,
    geometric_samples,
    side_from_streams,
    side_indicator,
)
from src.utils.errors import DomainError
from src.utils.stats import ks_against_geometric


def test_geometric_value_is_monotone():
    stream = GeomStream(np.random.default_rng(1))
    ts = np.linspace(0.01, 1.0, 60)
    values = [stream.value(t) for t in ts]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert stream.value(1.0) == 0


def test_geometric_value_law():
    t = 0.3
    samples = np.array([GeomStream(np.random.default_rng(s)).value(t) for s in range(5000)])
    assert ks_against_geometric(samples, t) < 0.03


def test_geometric_value_domain():
    with pytest.raises(DomainError):
        GeomStream(np.random.default_rng(0)).value(0.0)


def test_excursion_parameter():
    assert excursion_parameter(0.5, 2) == pytest.approx(0.5)
    assert excursion_parameter(0.0, 1) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        excursion_parameter(1.0, 2)
    with pytest.raises(DomainError):
        excursion_parameter(0.5, 0)


def test_excursion_parameters_degenerate_entries():
    out = excursion_parameters(np.array([0.5, 1.0, 0.2]), np.array([2, 3, 0]))
    assert out.tolist() == pytest.approx([0.5, 0.0, 0.0])


def test_geometric_samples_infinite_for_zero_parameter():
    out = geometric_samples(np.random.default_rng(0), np.array([0.0, 1.0]))
    assert np.isinf(out[0]) and out[1] == 0.0


def test_streams_are_keyed():
    streams = CouplingStreams(99)
    a = streams.R(1, 2, 3, 4).value(0.05)
    assert streams.R(1, 2, 3, 4).value(0.05) == a
    draws_r = [streams.R(1, 2, 3, i).value(0.05) for i in range(1, 30)]
    draws_rt = [streams.R_tilde(1, 2, 3, i).value(0.05) for i in range(1, 30)]
    assert draws_r != draws_rt


def test_side_indicator():
    assert side_indicator(3, 2) == 1
    assert side_indicator(2, 2) == 0
    assert side_indicator(0, 5) == 0


def test_side_from_streams_degenerate_root():
    streams = CouplingStreams(5)
    assert side_from_streams(streams, 1, 1, 1, 1, 1.0, 2, 0.3, 2) is None
    assert side_from_streams(streams, 1, 1, 1, 1, 0.3, 2, 0.3, 0) is None
    R_v, R_x, side = side_from_streams(streams, 1, 1, 1, 1, 0.3, 2, 0.4, 3)
    assert side == side_indicator(R_v, R_x)


def test_type_pool():
    with pytest.raises(DomainError):
        TypePool(np.array([]), np.array([]))
    with pytest.raises(DomainError):
        TypePool(np.array([0.1, 0.2]), np.array([1]))
    pool = TypePool(np.array([0.25, 1.0]), np.array([2, 4]))
    sample = pool.sample(np.random.default_rng(3))
    assert (sample.r, sample.d) in {(0.25, 2), (1.0, 4)}
    assert pool.to_report()["p_one_fraction"] == 0.5
