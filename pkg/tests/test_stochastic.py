import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgsched.stochastic import (
    UncertainInput,
    gaussian_factors,
    matrix_sqrt_psd,
    monte_carlo_propagate,
    propagate,
    reconstruct,
    sigma_points,
    weights,
)


def test_single_factor_half_weight_points():
    s = sigma_points([0.0], [[1.0]], 0.5)
    assert sorted(np.round(s.points.ravel(), 12)) == pytest.approx(
        [-np.sqrt(2), 0.0, np.sqrt(2)])
    assert s.weights[0] == 0.5


def test_diagonal_two_factor_offsets():
    s = sigma_points(np.zeros(2), np.diag([4.0, 9.0]), w0=1 / 3)
    offsets = s.points[1:3]
    assert offsets[0] == pytest.approx([2 * np.sqrt(3), 0.0], abs=1e-12)
    assert offsets[1] == pytest.approx([0.0, 3 * np.sqrt(3)], abs=1e-12)
    assert s.points[3] == pytest.approx(-offsets[0], abs=1e-12)


def test_zero_covariance_collapses_all_points():
    s = sigma_points(np.array([2.0, -1.0]), np.zeros((2, 2)), 0.2)
    assert np.all(s.points == s.points[0])


def test_weight_vector_shapes_and_sums():
    assert weights(3, 0.5) == pytest.approx([0.5] + [1 / 12] * 6)
    assert weights(1, 0.0) == pytest.approx([0.0, 0.5, 0.5])
    with pytest.raises(ValueError):
        weights(2, 1.0)
    with pytest.raises(ValueError):
        weights(0, 0.5)


def test_degenerate_center_weight_rejected():
    with pytest.raises(ValueError):
        sigma_points([0.0], [[1.0]], 1.0)


def test_non_psd_covariance_rejected():
    with pytest.raises(Exception):
        sigma_points(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), 0.3)


@st.composite
def psd_inputs(draw):
    a = draw(st.integers(1, 6))
    w0 = draw(st.floats(0.0, 0.9))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(a, a))
    cov = B @ B.T
    mean = rng.normal(size=a)
    return mean, cov, w0


@given(psd_inputs())
@settings(max_examples=80)
def test_moment_matching(inp):
    mean, cov, w0 = inp
    s = sigma_points(mean, cov, w0)
    m, c = reconstruct(s.points, s.weights)
    scale = max(1.0, np.abs(cov).max())
    assert np.abs(m - mean).max() <= 1e-10 * max(1.0, np.abs(mean).max())
    assert np.abs(c - cov).max() <= 1e-9 * scale
    assert s.weights.sum() == pytest.approx(1.0, abs=1e-12)


@given(psd_inputs(), st.integers(0, 1000))
@settings(max_examples=40)
def test_affine_maps_propagate_exactly(inp, seed):
    mean, cov, w0 = inp
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, mean.size))
    b = rng.normal(size=3)
    stats = propagate(lambda x: A @ x + b, sigma_points(mean, cov, w0))
    scale = max(1.0, np.abs(cov).max(), np.abs(mean).max())
    assert np.abs(stats.mean - (A @ mean + b)).max() <= 1e-9 * scale
    assert np.abs(stats.covariance - A @ cov @ A.T).max() <= 1e-8 * scale**2


def test_square_map_matches_gaussian_second_moment():
    stats = propagate(lambda x: np.array([x[0] ** 2]),
                      sigma_points([0.0], [[1.0]], 1 / 3))
    assert stats.mean[0] == pytest.approx(1.0, abs=1e-12)


def test_square_map_against_seeded_sampling():
    ut = propagate(lambda x: np.array([x[0] ** 2]),
                   sigma_points([0.0], [[1.0]], 1 / 3))
    mc = monte_carlo_propagate(lambda x: np.array([x[0] ** 2]),
                               [0.0], [[1.0]], n_samples=100_000, seed=11)
    se = np.sqrt(mc.covariance[0, 0] / 100_000)
    assert abs(mc.mean[0] - ut.mean[0]) <= 3 * se


def test_sampling_is_seed_deterministic():
    f = lambda x: np.array([np.sin(x).sum()])
    a = monte_carlo_propagate(f, np.zeros(2), np.eye(2), 500, seed=3)
    b = monte_carlo_propagate(f, np.zeros(2), np.eye(2), 500, seed=3)
    assert np.array_equal(a.per_point, b.per_point)


def test_matrix_sqrt_handles_rank_deficiency():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    L = matrix_sqrt_psd(cov)
    assert L @ L.T == pytest.approx(cov, abs=1e-12)


def test_factor_model_dimensions():
    u = gaussian_factors(sigma_load=0.05, sigma_wind=0.05, sigma_price=0.05)
    assert u.mean.shape == (3,)
    assert u.samples().count == 7
    per_hour = gaussian_factors(sigma_load=0.05, per_hour=True, horizon=24)
    assert per_hour.mean.shape == (72,)
    assert per_hour.samples().count == 145


def test_factor_map_names_validated():
    with pytest.raises(ValueError):
        UncertainInput(np.zeros(2), np.eye(2), factor_map=("load", "volume"))
