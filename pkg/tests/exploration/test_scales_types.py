import numpy as np
import pytest

from src.exploration.scales import scale_parameters
from src.exploration.types import (
    check_atoms,
    estimate_q_grid,
    psi,
    type_bin,
    type_bins,
    validate_q_grid,
)
from src.utils.errors import AtomCollisionError, DomainError


def test_scales_at_moderate_level():
    scales = scale_parameters(8, s=1.5, d=1)
    assert scales.alpha == 0.5
    assert scales.delta == 0.5
    assert scales.ball_radius == 16
    assert scales.gamma == pytest.approx(0.0625)
    assert scales.cap == 1
    assert scales.special_length == 2
    assert scales.rho_clamped and scales.rho == 2
    assert scales.near_radius == 32
    assert scales.horizon == 256
    assert any("clamped" in w for w in scales.warnings)


def test_rho_floor_is_respected():
    assert scale_parameters(8, s=1.5, d=1, rho_floor=5).rho == 5


@pytest.mark.parametrize("s", [1.0, 2.0, 2.5])
def test_scales_need_alpha_below_one(s):
    with pytest.raises(DomainError):
        scale_parameters(8, s=s, d=1)


def test_special_phase_must_fit():
    with pytest.raises(DomainError):
        scale_parameters(4, s=1.5, d=1, gamma=1.0)


def test_bad_rho_floor():
    with pytest.raises(DomainError):
        scale_parameters(8, s=1.5, d=1, rho_floor=1)


def test_q_grid_is_strictly_increasing():
    rng = np.random.default_rng(0)
    samples = np.concatenate([rng.random(500), np.full(50, 0.25)])
    q = estimate_q_grid(samples, 8)
    assert q.size == 8
    assert np.all(np.diff(q) > 0)
    assert 0 < q[0] and q[-1] < 1
    validate_q_grid(q)


def test_atoms_on_grid_points_are_rejected():
    samples = np.array([0.3] * 50 + [0.1] * 50)
    with pytest.raises(AtomCollisionError) as info:
        check_atoms(samples, [0.3])
    assert info.value.q == 0.3


@pytest.mark.parametrize("grid", [[], [0.5, 0.5], [0.0, 0.5], [0.5, 1.0], [0.6, 0.4]])
def test_invalid_q_grid(grid):
    with pytest.raises(DomainError):
        validate_q_grid(grid)


def test_type_bin():
    q = np.array([0.2, 0.5, 0.8])
    assert type_bin(0.1, 2, q) == (1, 2)
    assert type_bin(0.5, 2, q) == (3, 2)
    assert type_bin(0.9, 2, q) == (0, 0)
    assert type_bin(0.1, 4, q) == (0, 0)
    assert type_bin(0.1, 0, q) == (0, 0)


def test_type_bins_match_scalar():
    q = np.array([0.2, 0.5, 0.8])
    p = np.array([0.1, 0.3, 0.5, 0.79, 0.85])
    d = np.array([1, 2, 3, 4, 1])
    j, m = type_bins(p, d, q)
    assert list(zip(j.tolist(), m.tolist())) == [type_bin(a, b, q) for a, b in zip(p, d)]


def test_psi():
    assert psi(np.array([0.5])) == pytest.approx(1.0)
    assert psi(np.array([0.5, 0.75])) == pytest.approx(2.0)
