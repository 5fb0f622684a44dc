import math

import numpy as np
import pytest

from gstrack.dynamics import (
    EvolutionModel,
    ObservationNoise,
    SignalPrior,
    as_index_set,
    evolve,
    heat_source_trajectory,
    kh_step,
    normalize_energy,
    observe,
    translation_operator,
)
from gstrack.graph_core import WeightedGraph, graph_basis


def _complete(n):
    return WeightedGraph(np.ones((n, n)) - np.eye(n))


# -- translation ----------------------------------------------------------------


def test_translation_two_vertices():
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    basis = graph_basis(WeightedGraph(W))
    T = translation_operator(basis, 0)
    np.testing.assert_allclose(np.abs(np.diag(T)), [1 / math.sqrt(2)] * 2)
    np.testing.assert_allclose(np.diag(T), basis.eigenvectors[0, :])
    assert np.count_nonzero(T - np.diag(np.diag(T))) == 0


def test_translation_scale_and_bounds(small_graph):
    _, basis = small_graph
    n = basis.n
    T = translation_operator(basis, 3, math.sqrt(n))
    np.testing.assert_allclose(np.diag(T), math.sqrt(n) * basis.eigenvectors[3, :])
    with pytest.raises(IndexError):
        translation_operator(basis, n)


def test_translation_moves_delta_to_center(small_graph):
    # translating the constant-spectrum signal gives the delta at the center
    _, basis = small_graph
    n = basis.n
    T = translation_operator(basis, 2, math.sqrt(n))
    f = basis.eigenvectors @ (T @ np.full(n, 1 / math.sqrt(n)))
    expected = np.zeros(n)
    expected[2] = 1.0
    np.testing.assert_allclose(f, expected, atol=1e-12)


# -- opinion dynamics ---------------------------------------------------------


def test_kh_fixed_point():
    f = np.full(5, 0.3)
    np.testing.assert_array_equal(kh_step(f, 0.1), f)


def test_kh_large_confidence_reaches_mean(rng):
    f = rng.uniform(size=10)
    np.testing.assert_allclose(kh_step(f, 1.0), np.full(10, f.mean()))


def test_kh_two_clusters():
    np.testing.assert_allclose(kh_step(np.array([0.0, 0.1, 0.9, 1.0]), 0.3), [0.05, 0.05, 0.95, 0.95])


def test_kh_rejects_negative_eps():
    with pytest.raises(ValueError):
        kh_step(np.zeros(3), -0.1)


# -- evolution ------------------------------------------------------------------


def test_evolve_noiseless_identity(rng):
    model = EvolutionModel.identity(4, 0.0)
    f = rng.standard_normal(4)
    np.testing.assert_array_equal(evolve(f, model, 1, rng), f)


def test_evolve_normalized(rng):
    model = EvolutionModel.constant(np.diag([1.0, 2.0, 3.0]), 0.0)
    out = evolve(np.ones(3), model, 1, rng, normalize=True)
    assert np.linalg.norm(out) == pytest.approx(1.0)


def test_evolve_monte_carlo_mean():
    rng = np.random.default_rng(0)
    H = rng.standard_normal((4, 4))
    sv2 = 0.25
    model = EvolutionModel.constant(H, sv2)
    f = rng.standard_normal(4)
    draws = np.array([evolve(f, model, 1, rng) for _ in range(10_000)])
    assert np.all(np.abs(draws.mean(axis=0) - H @ f) <= 4 * math.sqrt(sv2) / 100)


def test_evolution_model_shape_check():
    model = EvolutionModel(3, lambda t: np.eye(4), 0.1)
    with pytest.raises(ValueError):
        model.spectral_operator_at(1)


def test_evolution_model_rejects_negative_noise():
    with pytest.raises(ValueError):
        EvolutionModel.identity(3, -1.0)


def test_time_varying_operator():
    model = EvolutionModel(2, lambda t: t * np.eye(2), 0.0)
    np.testing.assert_array_equal(model.spectral_operator_at(3), 3 * np.eye(2))


# -- observation --------------------------------------------------------------


def test_observe_empty_set(rng):
    assert observe(np.ones(5), [], ObservationNoise(1.0), rng).shape == (0,)


def test_observe_near_noiseless(rng):
    f = rng.standard_normal(6)
    y = observe(f, range(6), ObservationNoise(1e-24), rng)
    np.testing.assert_allclose(y, f, atol=1e-10)


def test_observe_noise_variance():
    rng = np.random.default_rng(1)
    f = np.arange(4.0)
    noise = ObservationNoise(0.3)
    res = np.array([observe(f, [0, 2, 3], noise, rng) - f[[0, 2, 3]] for _ in range(10_000)])
    np.testing.assert_allclose(res.var(axis=0), 0.3, rtol=0.05)


def test_observe_noise_shared_across_sets():
    f = np.zeros(5)
    noise = ObservationNoise(1.0)
    a = observe(f, [0, 1, 2, 3, 4], noise, np.random.default_rng(9))
    b = observe(f, [1, 3], noise, np.random.default_rng(9))
    np.testing.assert_array_equal(b, a[[1, 3]])


def test_observe_rejects_bad_sets(rng):
    noise = ObservationNoise(1.0)
    with pytest.raises(IndexError):
        observe(np.zeros(3), [3], noise, rng)
    with pytest.raises(ValueError):
        observe(np.zeros(3), [1, 1], noise, rng)


def test_observation_noise_must_be_positive():
    with pytest.raises(ValueError):
        ObservationNoise(0.0)


# -- heat source ----------------------------------------------------------------


def test_trajectory_zero_steps(rng):
    np.testing.assert_array_equal(heat_source_trajectory(_complete(3), 1, 0, rng), [1])


def test_trajectory_follows_edges():
    g = _complete(3)
    a = heat_source_trajectory(g, 0, 50, np.random.default_rng(4))
    b = heat_source_trajectory(g, 0, 50, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)
    assert a[0] == 0 and a.size == 51
    assert all(g.weights[u, v] > 0 for u, v in zip(a[:-1], a[1:]))


def test_trajectory_two_vertices_alternates(rng):
    path = heat_source_trajectory(_complete(2), 0, 6, rng)
    np.testing.assert_array_equal(path, [0, 1, 0, 1, 0, 1, 0])


def test_trajectory_isolated_vertex_stays(rng):
    path = heat_source_trajectory(WeightedGraph(np.zeros((3, 3))), 2, 4, rng)
    np.testing.assert_array_equal(path, [2] * 5)


# -- helpers ----------------------------------------------------------------------


def test_prior_sampling_statistics():
    prior = SignalPrior(np.array([1.0, -1.0]), np.array([0.5, 2.0]))
    rng = np.random.default_rng(2)
    draws = np.array([prior.sample(rng) for _ in range(20_000)])
    np.testing.assert_allclose(draws.mean(axis=0), prior.mean, atol=0.05)
    np.testing.assert_allclose(draws.var(axis=0), prior.covariance_diag, rtol=0.05)


def test_prior_validation():
    with pytest.raises(ValueError):
        SignalPrior(np.zeros(2), np.ones(3))
    with pytest.raises(ValueError):
        SignalPrior(np.zeros(2), -np.ones(2))


def test_index_set_sorted():
    assert as_index_set([3, 0, 2]).tolist() == [0, 2, 3]


def test_normalize_zero_signal():
    with pytest.raises(ValueError):
        normalize_energy(np.zeros(3))
