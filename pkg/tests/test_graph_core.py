import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gstrack.graph_core import (
    SpectralBasis,
    WeightedGraph,
    build_laplacian,
    community_graph,
    gft,
    graph_basis,
    igft,
    random_geometric_graph,
    res_realize,
    spectral_decompose,
)

import oracles


def _edge(n=2):
    W = np.zeros((n, n))
    W[0, 1] = W[1, 0] = 1.0
    return WeightedGraph(W)


@st.composite
def random_graphs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.floats(0.0, 1.0))
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.uniform(size=(n, n)) < density, 1) * rng.uniform(0.1, 3.0, size=(n, n))
    return WeightedGraph(upper + upper.T)


# -- WeightedGraph ---------------------------------------------------------


def test_graph_rejects_asymmetric():
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_graph_rejects_negative_weights():
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_graph_rejects_self_loops():
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[1.0, 1.0], [1.0, 0.0]]))


def test_graph_edges_and_neighbors(path3):
    assert path3.num_edges == 2
    assert path3.neighbors(1).tolist() == [0, 2]
    assert path3.is_connected()


# -- Laplacian -----------------------------------------------------------------


def test_laplacian_single_edge():
    np.testing.assert_array_equal(build_laplacian(_edge()), [[1, -1], [-1, 1]])


def test_laplacian_no_edges():
    np.testing.assert_array_equal(build_laplacian(WeightedGraph(np.zeros((4, 4)))), np.zeros((4, 4)))


def test_laplacian_path(path3):
    np.testing.assert_array_equal(build_laplacian(path3), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


@settings(max_examples=50, deadline=None)
@given(random_graphs())
def test_laplacian_rows_sum_to_zero_and_psd(g):
    L = build_laplacian(g)
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-12)
    assert np.linalg.eigvalsh(L).min() > -1e-10


# -- spectral decomposition --------------------------------------------------


def test_two_vertex_spectrum():
    basis = graph_basis(_edge())
    np.testing.assert_allclose(basis.eigenvalues, [0, 2], atol=1e-12)


def test_connected_graph_constant_mode(small_graph):
    g, basis = small_graph
    v0 = basis.eigenvectors[:, 0]
    np.testing.assert_allclose(np.abs(v0), 1 / math.sqrt(g.n), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_zero_eigenvalues_count_components(g):
    basis = graph_basis(g)
    assert int(np.sum(basis.eigenvalues < 1e-9)) == oracles.union_find_components(g.weights)
    assert g.num_components() == oracles.union_find_components(g.weights)


@settings(max_examples=60, deadline=None)
@given(random_graphs())
def test_basis_invariants(g):
    basis = graph_basis(g)
    V, lam = basis.eigenvectors, basis.eigenvalues
    n = g.n
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(V @ np.diag(lam) @ V.T, build_laplacian(g), atol=1e-9)
    assert np.all(np.diff(lam) >= -1e-12)
    # sign convention: the largest-magnitude entry is positive
    for k in range(n):
        col = np.round(V[:, k], 12)
        assert col[np.argmax(np.abs(col))] > 0


def test_decomposition_is_deterministic(small_graph):
    g, _ = small_graph
    a = spectral_decompose(build_laplacian(g))
    b = spectral_decompose(build_laplacian(g).copy())
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


def test_spectral_basis_is_read_only(small_graph):
    _, basis = small_graph
    with pytest.raises(ValueError):
        basis.eigenvectors[0, 0] = 1.0


def test_spectral_basis_rejects_bad_shapes():
    with pytest.raises(ValueError):
        SpectralBasis(np.eye(3), np.zeros(2))


# -- GFT ------------------------------------------------------------------------


def test_gft_of_constant(small_graph):
    g, basis = small_graph
    coeffs = gft(basis, np.full(g.n, 2.5))
    assert coeffs[0] == pytest.approx(2.5 * math.sqrt(g.n))
    np.testing.assert_allclose(coeffs[1:], 0, atol=1e-12)


def test_gft_round_trip(small_graph, rng):
    _, basis = small_graph
    f = rng.standard_normal(basis.n)
    np.testing.assert_allclose(igft(basis, gft(basis, f)), f, atol=1e-12)
    assert np.linalg.norm(gft(basis, f)) == pytest.approx(np.linalg.norm(f))


def test_gft_dimension_mismatch(small_graph):
    _, basis = small_graph
    with pytest.raises(ValueError):
        gft(basis, np.zeros(basis.n + 1))
    with pytest.raises(ValueError):
        igft(basis, np.zeros(basis.n - 1))


# -- generators ---------------------------------------------------------------


def test_geometric_large_radius_is_complete(rng):
    g = random_geometric_graph(12, math.sqrt(2), rng)
    assert g.num_edges == 12 * 11 // 2


def test_geometric_zero_radius_is_edgeless(rng):
    assert random_geometric_graph(12, 0.0, rng).num_edges == 0


def test_geometric_defaults_are_connected():
    connected = sum(
        oracles.union_find_components(random_geometric_graph(100, 0.6, np.random.default_rng(s)).weights) == 1
        for s in range(100)
    )
    assert connected >= 99


def test_geometric_is_seeded():
    a = random_geometric_graph(20, 0.3, np.random.default_rng(1))
    b = random_geometric_graph(20, 0.3, np.random.default_rng(1))
    np.testing.assert_array_equal(a.weights, b.weights)


def test_geometric_gives_up_when_connection_impossible(rng):
    with pytest.raises(RuntimeError):
        random_geometric_graph(10, 0.0, rng, require_connected=True, max_attempts=3)


def test_community_single_full_block(rng):
    g = community_graph([6], 1.0, 0.0, rng)
    assert g.num_edges == 15


def test_community_no_edges(rng):
    assert community_graph([5, 5], 0.0, 0.0, rng).num_edges == 0


def test_community_edge_count_statistics():
    intra = 7 * math.comb(10, 2)
    inter = math.comb(70, 2) - intra
    mean = 0.8 * intra + 0.02 * inter
    var = intra * 0.8 * 0.2 + inter * 0.02 * 0.98
    assert mean == pytest.approx(294.0)
    counts = [community_graph([10] * 7, 0.8, 0.02, np.random.default_rng(s)).num_edges for s in range(100)]
    assert abs(np.mean(counts) - mean) <= 3 * math.sqrt(var / 100)


def test_res_extremes(small_graph, rng):
    g, _ = small_graph
    np.testing.assert_array_equal(res_realize(g, 1.0, rng).weights, g.weights)
    assert res_realize(g, 0.0, rng).num_edges == 0


def test_res_keeps_half_the_edges(small_graph):
    g = community_graph([10] * 7, 0.8, 0.02, np.random.default_rng(0))
    m = g.num_edges
    counts = [res_realize(g, 0.5, np.random.default_rng(s)).num_edges for s in range(200)]
    assert abs(np.mean(counts) - m / 2) <= 3 * math.sqrt(m * 0.25 / 200)


def test_res_is_subgraph(small_graph, rng):
    g, _ = small_graph
    h = res_realize(g, 0.5, rng)
    assert np.all((h.weights == 0) | (h.weights == g.weights))
