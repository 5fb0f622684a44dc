"""Weighted undirected graphs, Laplacians and the graph Fourier transform.

Also holds the random graph families used by the tracking scenarios:
random geometric graphs in the unit square, community (block) graphs and
random-edge-sampling (RES) realizations of a base graph.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph given by a symmetric nonnegative adjacency matrix."""

    weights: np.ndarray

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {W.shape}")
        if np.any(W < 0):
            raise ValueError("edge weights must be nonnegative")
        scale = max(1.0, float(np.abs(W).max(initial=0.0)))
        if np.abs(W - W.T).max(initial=0.0) > _SYM_TOL * scale:
            raise ValueError("adjacency must be symmetric")
        if np.abs(np.diag(W)).max(initial=0.0) > 0:
            raise ValueError("adjacency must have a zero diagonal")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """(m, 2) array of vertex pairs i < j with nonzero weight."""
        i, j = np.nonzero(np.triu(self.weights, k=1))
        return np.column_stack([i, j])

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1)))

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.weights[v])

    def num_components(self) -> int:
        ncomp, _ = connected_components(self.weights != 0, directed=False)
        return int(ncomp)

    def is_connected(self) -> bool:
        return self.num_components() == 1


@dataclass(frozen=True)
class SpectralBasis:
    """Laplacian eigenpairs: columns of ``eigenvectors`` are the Fourier modes."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        V = np.array(self.eigenvectors, dtype=float)
        lam = np.array(self.eigenvalues, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or lam.shape != (V.shape[0],):
            raise ValueError("eigenvectors must be n x n and eigenvalues length n")
        V.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvectors", V)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def build_laplacian(g: WeightedGraph) -> np.ndarray:
    """Combinatorial Laplacian ``D - W`` with ``D = diag(1^T W)``."""
    if not isinstance(g, WeightedGraph):
        g = WeightedGraph(g)
    W = g.weights
    return np.diag(W.sum(axis=0)) - W


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; first index wins ties
    idx = np.argmax(np.abs(np.round(V, 12)), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _order_degenerate(lam: np.ndarray, V: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    # within a cluster of (numerically) equal eigenvalues, order columns lexicographically
    order = np.arange(lam.size)
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[stop] - lam[start] <= tol:
            stop += 1
        if stop - start > 1:
            block = np.round(V[:, start:stop], 10)
            keys = [tuple(-block[:, k]) for k in range(stop - start)]
            perm = sorted(range(stop - start), key=lambda k: keys[k])
            order[start:stop] = start + np.array(perm)
        start = stop
    return lam[order], V[:, order]


def spectral_decompose(L: np.ndarray, tol: float = 1e-9) -> SpectralBasis:
    """Eigendecomposition ``L = V diag(lam) V^T`` with ascending eigenvalues.

    Eigenvector signs are fixed so the entry of largest magnitude is positive,
    which makes translation operators built from ``V`` reproducible. Inside a
    repeated eigenvalue the (arbitrary) basis returned by LAPACK is kept, with
    columns sorted lexicographically after the sign fix.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    scale = max(1.0, float(np.abs(L).max(initial=0.0)))
    if np.abs(L - L.T).max(initial=0.0) > _SYM_TOL * scale:
        raise ValueError("matrix must be symmetric")
    try:
        lam, V = linalg.eigh(L)
    except linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigendecomposition did not converge: {exc}") from exc
    lam = np.where(np.abs(lam) < tol * scale, 0.0, lam)
    V = _fix_signs(V)
    lam, V = _order_degenerate(lam, V, tol * scale)
    return SpectralBasis(V, lam)


def graph_basis(g: WeightedGraph) -> SpectralBasis:
    return spectral_decompose(build_laplacian(g))


def gft(basis: SpectralBasis, f: np.ndarray) -> np.ndarray:
    """Graph Fourier transform ``V^T f``."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != basis.n:
        raise ValueError(f"signal length {f.shape[0]} does not match graph size {basis.n}")
    return basis.eigenvectors.T @ f


def igft(basis: SpectralBasis, f_hat: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform ``V f_hat``."""
    f_hat = np.asarray(f_hat, dtype=float)
    if f_hat.shape[0] != basis.n:
        raise ValueError(f"coefficient length {f_hat.shape[0]} does not match graph size {basis.n}")
    return basis.eigenvectors @ f_hat


def _from_upper_mask(mask: np.ndarray) -> WeightedGraph:
    upper = np.triu(mask, k=1).astype(float)
    return WeightedGraph(upper + upper.T)


def random_geometric_graph(
    n: int,
    radius: float,
    rng: np.random.Generator,
    *,
    require_connected: bool = False,
    max_attempts: int = 100,
) -> WeightedGraph:
    """Unit-weight graph on ``n`` uniform points in the unit square.

    Vertices closer than ``radius`` (inclusive) are joined. With
    ``require_connected`` the point cloud is redrawn until the graph is
    connected, giving up after ``max_attempts`` draws.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    for _ in range(max_attempts):
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        g = _from_upper_mask(dist <= radius)
        if not require_connected or g.is_connected():
            return g
    raise RuntimeError(f"no connected geometric graph after {max_attempts} attempts")


def community_labels(community_sizes) -> np.ndarray:
    return np.repeat(np.arange(len(community_sizes)), community_sizes)


def community_graph(community_sizes, p_intra: float, p_inter: float, rng: np.random.Generator) -> WeightedGraph:
    """Stochastic block graph with independent unit-weight edges."""
    if not (0.0 <= p_intra <= 1.0 and 0.0 <= p_inter <= 1.0):
        raise ValueError("edge probabilities must lie in [0, 1]")
    labels = community_labels(community_sizes)
    n = labels.size
    prob = np.where(labels[:, None] == labels[None, :], p_intra, p_inter)
    draws = rng.uniform(size=(n, n))
    return _from_upper_mask(draws < prob)


def res_realize(g: WeightedGraph, p: float, rng: np.random.Generator) -> WeightedGraph:
    """Keep each edge of ``g`` independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("activation probability must lie in [0, 1]")
    n = g.n
    keep = rng.uniform(size=(n, n)) < p
    upper = np.triu(g.weights * keep, k=1)
    return WeightedGraph(upper + upper.T)
