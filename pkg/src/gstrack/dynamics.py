"""Ground-truth signal generation for the tracking experiments."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph_core import SpectralBasis, WeightedGraph


@dataclass(frozen=True)
class SignalPrior:
    """Gaussian prior on the spectral coefficients, diagonal covariance."""

    mean: np.ndarray
    covariance_diag: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance_diag, dtype=float)
        if mean.shape != cov.shape or mean.ndim != 1:
            raise ValueError("mean and covariance_diag must be vectors of equal length")
        if np.any(cov < 0):
            raise ValueError("prior variances must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance_diag", cov)

    @property
    def n(self) -> int:
        return self.mean.size

    @property
    def covariance(self) -> np.ndarray:
        return np.diag(self.covariance_diag)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.mean + np.sqrt(self.covariance_diag) * rng.standard_normal(self.n)


@dataclass(frozen=True)
class EvolutionModel:
    """Spectral evolution ``f_t = H_t f_{t-1} + xi_t`` with white process noise.

    ``operator`` maps a step index ``t`` to the n x n spectral matrix ``H_t``.
    """

    n: int
    operator: Callable[[int], np.ndarray]
    process_noise_var: float

    def __post_init__(self):
        if self.process_noise_var < 0:
            raise ValueError("process noise variance must be >= 0")

    def spectral_operator_at(self, t: int) -> np.ndarray:
        H = np.asarray(self.operator(t), dtype=float)
        if H.shape != (self.n, self.n):
            raise ValueError(f"operator at t={t} has shape {H.shape}, expected {(self.n, self.n)}")
        return H

    @classmethod
    def constant(cls, H: np.ndarray, process_noise_var: float) -> "EvolutionModel":
        H = np.array(H, dtype=float)
        H.setflags(write=False)
        return cls(H.shape[0], lambda t: H, process_noise_var)

    @classmethod
    def identity(cls, n: int, process_noise_var: float) -> "EvolutionModel":
        return cls.constant(np.eye(n), process_noise_var)


@dataclass(frozen=True)
class ObservationNoise:
    obs_noise_var: float

    def __post_init__(self):
        if not self.obs_noise_var > 0:
            raise ValueError("observation noise variance must be > 0")

    @property
    def precision(self) -> float:
        return 1.0 / self.obs_noise_var


def as_index_set(sample_set, n: int | None = None) -> np.ndarray:
    """Sorted, duplicate-free integer index array."""
    idx = np.asarray(sorted(int(i) for i in sample_set), dtype=int)
    if idx.size and np.any(np.diff(idx) == 0):
        raise ValueError("sample set contains duplicate vertices")
    if n is not None and idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"sample set has vertices outside [0, {n})")
    return idx


def normalize_energy(f: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(f)
    if norm == 0:
        raise ValueError("cannot normalize a zero signal")
    return f / norm


def translation_operator(basis: SpectralBasis, center: int, scale: float = 1.0) -> np.ndarray:
    """Diagonal spectral operator ``scale * diag(V^T delta_center)``.

    Applying it to ``f_hat`` is the graph translation of ``f`` to ``center``.
    ``scale = sqrt(n)`` is the usual normalization of generalized translation.
    """
    n = basis.n
    if not 0 <= center < n:
        raise IndexError(f"center {center} outside [0, {n})")
    return scale * np.diag(basis.eigenvectors[center, :])


def kh_step(f: np.ndarray, eps: float) -> np.ndarray:
    """One Krause-Hegselmann bounded-confidence update.

    Each agent moves to the mean opinion of all agents (itself included)
    whose opinion is within ``eps`` of its own.
    """
    if eps < 0:
        raise ValueError("confidence bound must be >= 0")
    f = np.asarray(f, dtype=float)
    close = np.abs(f[:, None] - f[None, :]) <= eps
    return (close @ f) / close.sum(axis=1)


def evolve(
    f_hat: np.ndarray,
    model: EvolutionModel,
    t: int,
    rng: np.random.Generator,
    *,
    normalize: bool = False,
) -> np.ndarray:
    H = model.spectral_operator_at(t)
    out = H @ f_hat
    if model.process_noise_var > 0:
        out = out + np.sqrt(model.process_noise_var) * rng.standard_normal(model.n)
    if normalize:
        out = normalize_energy(out)
    return out


def observe(
    f: np.ndarray,
    sample_set,
    noise: ObservationNoise,
    rng: np.random.Generator,
) -> np.ndarray:
    """Noisy samples of the vertex-domain signal ``f`` on ``sample_set``.

    A full-length noise vector is always drawn, so two calls from generators
    in the same state see the same noise on every vertex whatever the set.
    """
    f = np.asarray(f, dtype=float)
    idx = as_index_set(sample_set, f.size)
    w = np.sqrt(noise.obs_noise_var) * rng.standard_normal(f.size)
    return (f + w)[idx]


def heat_source_trajectory(g: WeightedGraph, start: int, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random walk of ``steps`` moves; returns ``steps + 1`` vertices."""
    if not 0 <= start < g.n:
        raise IndexError(f"start vertex {start} outside [0, {g.n})")
    path = np.empty(steps + 1, dtype=int)
    path[0] = start
    for k in range(1, steps + 1):
        nbrs = g.neighbors(path[k - 1])
        path[k] = path[k - 1] if nbrs.size == 0 else nbrs[rng.integers(nbrs.size)]
    return path
