"""Shared fixtures: small models and environments with fixed seeds."""

import numpy as np
import pytest

from src.percolation.generator import Environment, generate_environment
from src.percolation.model import ModelParams

SEED = 20240611


@pytest.fixture
def line_params() -> ModelParams:
    return ModelParams(d=1, s=2.5, beta=1.0, L=256)


@pytest.fixture
def plane_params() -> ModelParams:
    return ModelParams(d=2, s=3.0, beta=1.0, L=32)


@pytest.fixture
def line_env(line_params) -> Environment:
    return generate_environment(line_params, SEED)


@pytest.fixture
def plane_env(plane_params) -> Environment:
    return generate_environment(plane_params, SEED)


@pytest.fixture
def nn_only_env() -> Environment:
    """d = 1 ring with beta = 0: only the forced nearest-neighbour edges."""
    params = ModelParams(d=1, s=2.0, beta=0.0, L=64)
    return Environment(params, SEED, np.empty(0), np.empty(0))


@pytest.fixture
def cfg_text() -> str:
    return "pipeline: stable\nseed: 7\nd: 1\ns: 2.5\nL: 1024\n"
