"""Kalman filter on graph Fourier coefficients.

The filter tracks ``f_hat_t`` under ``f_hat_t = H_t f_hat_{t-1} + xi_t`` with
observations ``y_t = Psi_t (V f_hat_t + w_t)``. Covariances are propagated in
the spectral domain; the posterior covariance uses the information form.

``transition_information`` is the map taking the prior information matrix at
``t`` and a (possibly fractional) sampling vector to the prior information at
``t + 1``. ``instant_mse`` is the per-step cost ``tr(P+)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .dynamics import EvolutionModel, ObservationNoise, as_index_set
from .graph_core import SpectralBasis


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


def symmetrize(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def spd_inverse(X: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    try:
        c = linalg.cho_factor(X, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc
    return symmetrize(linalg.cho_solve(c, np.eye(X.shape[0]), check_finite=False))


@dataclass(frozen=True)
class FilterState:
    posterior_mean: np.ndarray
    posterior_cov: np.ndarray
    time: int = 0

    def __post_init__(self):
        mean = np.asarray(self.posterior_mean, dtype=float)
        cov = np.asarray(self.posterior_cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("posterior covariance must be n x n")
        object.__setattr__(self, "posterior_mean", mean)
        object.__setattr__(self, "posterior_cov", cov)

    @property
    def n(self) -> int:
        return self.posterior_mean.size

    @classmethod
    def from_prior(cls, mean, cov) -> "FilterState":
        cov = np.asarray(cov, dtype=float)
        if cov.ndim == 1:
            cov = np.diag(cov)
        return cls(np.asarray(mean, dtype=float), cov, 0)


@dataclass(frozen=True)
class Prediction:
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    time: int

    @property
    def n(self) -> int:
        return self.prior_mean.size

    @property
    def information(self) -> np.ndarray:
        return spd_inverse(self.prior_cov)


def predict(state: FilterState, model: EvolutionModel, t: int | None = None) -> Prediction:
    """Time update: ``f- = H f+``, ``P- = H P+ H^T + sigma_v^2 I``."""
    t = state.time + 1 if t is None else t
    if model.n != state.n:
        raise ValueError(f"model size {model.n} does not match state size {state.n}")
    H = model.spectral_operator_at(t)
    mean = H @ state.posterior_mean
    cov = symmetrize(H @ state.posterior_cov @ H.T) + model.process_noise_var * np.eye(state.n)
    return Prediction(mean, cov, t)


def update(
    pred: Prediction,
    y: np.ndarray,
    sample_set,
    basis: SpectralBasis,
    noise: ObservationNoise,
) -> FilterState:
    """Measurement update with noisy vertex samples ``y`` on ``sample_set``."""
    idx = as_index_set(sample_set, pred.n)
    y = np.asarray(y, dtype=float)
    if y.shape != idx.shape:
        raise ValueError(f"got {y.size} observations for {idx.size} sampled vertices")
    if idx.size == 0:
        return FilterState(pred.prior_mean.copy(), pred.prior_cov.copy(), pred.time)

    V_s = basis.eigenvectors[idx, :]  # Psi V
    P = pred.prior_cov
    PVt = P @ V_s.T
    innovation_cov = symmetrize(V_s @ PVt) + noise.obs_noise_var * np.eye(idx.size)
    try:
        c = linalg.cho_factor(innovation_cov, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"singular innovation covariance: {exc}") from exc
    residual = y - V_s @ pred.prior_mean
    mean = pred.prior_mean + PVt @ linalg.cho_solve(c, residual, check_finite=False)

    info = spd_inverse(P) + noise.precision * (V_s.T @ V_s)
    cov = spd_inverse(symmetrize(info))
    return FilterState(mean, cov, pred.time)


def instant_mse(state: FilterState) -> float:
    return float(np.trace(state.posterior_cov))


def sampling_information(basis: SpectralBasis, d: np.ndarray, noise: ObservationNoise) -> np.ndarray:
    """``sigma_w^-2 V^T diag(d) V``: information gained by sampling weights ``d``."""
    V = basis.eigenvectors
    return noise.precision * symmetrize((V.T * np.asarray(d, dtype=float)) @ V)


def transition_information(
    P_inv: np.ndarray,
    d: np.ndarray,
    model: EvolutionModel,
    noise: ObservationNoise,
    t: int,
    basis: SpectralBasis,
) -> np.ndarray:
    """Prior information at ``t + 1`` given prior information ``P_inv`` at ``t``.

    ``[H_{t+1} (P_inv + sigma_w^-2 V^T diag(d) V)^{-1} H_{t+1}^T + sigma_v^2 I]^{-1}``
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > 1):
        raise ValueError("sampling weights must lie in [0, 1]")
    posterior = spd_inverse(symmetrize(P_inv) + sampling_information(basis, d, noise))
    H = model.spectral_operator_at(t + 1)
    prior_next = symmetrize(H @ posterior @ H.T) + model.process_noise_var * np.eye(model.n)
    return spd_inverse(prior_next)
