import numpy as np
import pytest
from pydantic import ValidationError

from src.percolation.model import (
    Boundary,
    Lattice,
    ModelParams,
    Norm,
    connection_probability,
    expected_degree,
    pair_probability,
)
from src.utils.errors import DomainError


def test_connection_probability_forced_nearest_neighbour():
    params = ModelParams(d=1, s=2.5, beta=1.0, L=64)
    assert connection_probability(1, params) == 1.0
    assert connection_probability(2, params) == pytest.approx(1 - np.exp(-(2.0**-2.5)))


def test_connection_probability_random_nearest_neighbour():
    params = ModelParams(d=1, s=2.5, beta=1.0, L=64, nn_prob_one=False)
    assert connection_probability(1, params) == pytest.approx(1 - np.exp(-1.0))


def test_connection_probability_rejects_short_distance():
    params = ModelParams(d=1, s=2.5, L=64)
    with pytest.raises(DomainError):
        connection_probability(0.5, params)
    with pytest.raises(DomainError):
        connection_probability(np.inf, params)


def test_connection_probability_decreases():
    params = ModelParams(d=2, s=3.0, L=64)
    p = connection_probability(np.arange(2, 50, dtype=float), params)
    assert np.all(np.diff(p) < 0)


def test_tail_exponent_must_exceed_dimension():
    with pytest.raises(ValidationError):
        ModelParams(d=2, s=2.0, L=16)


def test_pair_probability_uses_configured_norm():
    z = np.array([[3, 4]])
    euclid = ModelParams(d=2, s=3.0, L=32, norm=Norm.EUCLIDEAN)
    sup = ModelParams(d=2, s=3.0, L=32, norm=Norm.SUP)
    assert pair_probability(z, euclid)[0] == pytest.approx(1 - np.exp(-(5.0**-3)))
    assert pair_probability(z, sup)[0] == pytest.approx(1 - np.exp(-(4.0**-3)))


def test_torus_wrap_is_canonical():
    lat = Lattice(1, 10)
    assert lat.wrap(np.array([6]))[0] == -4
    assert lat.wrap(np.array([5]))[0] == 5
    assert lat.sup_distance(np.array([0]), np.array([9]))[0] == 1


def test_free_boundary_shift_drops_exits():
    lat = Lattice(2, 8, Boundary.FREE)
    _, valid = lat.shift(np.array([0, 9]), np.array([[-1, 0], [-1, 0]]))
    assert valid.tolist() == [False, True]


def test_expected_degree_nn_only():
    params = ModelParams(d=2, s=3.0, beta=0.0, L=16)
    assert expected_degree(params) == pytest.approx(4.0)
