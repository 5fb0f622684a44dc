"""Numerical checks of matrix convexity and monotonicity (Loewner order).

A map ``f`` is matrix convex if ``f(th X1 + (1-th) X2) <= th f(X1) + (1-th) f(X2)``
in the positive semidefinite order, and matrix nondecreasing if ``X1 >= X2``
implies ``f(X1) >= f(X2)``. The checks evaluate these inequalities on given
points and report the smallest eigenvalue of the slack matrix, so a negative
slack beyond the tolerance is a counterexample.

The maps used to build the two-step sampling cost are collected here too, so
the composition argument behind its convexity can be tested piece by piece.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral_kalman import spd_inverse, symmetrize

DEFAULT_THETAS = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    slack: float

    def __bool__(self) -> bool:
        return self.ok


def min_eig(X) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return float(np.linalg.eigvalsh(symmetrize(X)).min())


def check_matrix_convex_midpoint(
    fn: Callable,
    X1,
    X2,
    thetas=DEFAULT_THETAS,
    *,
    concave: bool = False,
    tol: float = 1e-9,
) -> CheckResult:
    """Test (matrix) convexity of ``fn`` along the segment from ``X2`` to ``X1``.

    Scalar-valued maps are treated as 1 x 1 matrices. With ``concave=True`` the
    inequality is reversed. The returned slack is the worst (smallest)
    eigenvalue over ``thetas``.
    """
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    f1, f2 = np.asarray(fn(X1), dtype=float), np.asarray(fn(X2), dtype=float)
    worst = np.inf
    for th in thetas:
        mid = np.asarray(fn(th * X1 + (1 - th) * X2), dtype=float)
        slack = th * f1 + (1 - th) * f2 - mid
        if concave:
            slack = -slack
        worst = min(worst, min_eig(slack))
    return CheckResult(worst >= -tol, float(worst))


def check_matrix_monotone(
    fn: Callable,
    X_hi,
    X_lo,
    *,
    increasing: bool,
    tol: float = 1e-9,
) -> CheckResult:
    """Test monotonicity of ``fn`` on a pair with ``X_hi >= X_lo``.

    ``increasing=True`` checks ``fn(X_hi) >= fn(X_lo)`` (nondecreasing),
    otherwise ``fn(X_hi) <= fn(X_lo)`` (nonincreasing).
    """
    X_hi = np.asarray(X_hi, dtype=float)
    X_lo = np.asarray(X_lo, dtype=float)
    if X_hi.ndim == 2 and min_eig(X_hi - X_lo) < -tol:
        raise ValueError("expected X_hi >= X_lo in the semidefinite order")
    diff = np.asarray(fn(X_hi), dtype=float) - np.asarray(fn(X_lo), dtype=float)
    slack = min_eig(diff if increasing else -diff)
    return CheckResult(slack >= -tol, slack)


def random_spd(n: int, rng: np.random.Generator, floor: float = 0.5) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return A @ A.T / n + floor * np.eye(n)


def random_ordered_pair(n: int, rng: np.random.Generator, floor: float = 0.5):
    """Two SPD matrices ``(X_hi, X_lo)`` with ``X_hi - X_lo`` positive semidefinite."""
    lo = random_spd(n, rng, floor)
    return lo + random_spd(n, rng, 0.0), lo


# -- building blocks of the two-step cost ---------------------------------


def trace_inverse(X) -> float:
    return float(np.trace(np.linalg.inv(X)))


def neg_trace_inverse(X) -> float:
    return -float(np.trace(np.linalg.inv(X)))


def neg_congruence_inverse(A: np.ndarray, B: np.ndarray) -> Callable:
    """``X -> -A^T X^{-1} A - B``."""
    return lambda X: symmetrize(-A.T @ np.linalg.inv(X) @ A - B)


def congruence_inverse(A: np.ndarray, B: np.ndarray) -> Callable:
    """``X -> A^T X^{-1} A + B``."""
    return lambda X: symmetrize(A.T @ np.linalg.inv(X) @ A + B)


@dataclass(frozen=True)
class TwoStepPieces:
    """Intermediate maps of the two-step cost as functions of sampling weights.

    ``z1(d_now) = -H (J + s V^T D_now V)^{-1} H^T - sigma_v^2 I`` is minus the
    next prior covariance; ``z2(d_now, d_next) = z1^{-1} - s V^T D_next V`` is
    minus the next posterior information. The second cost term is
    ``-tr(z2^{-1})``.
    """

    info: np.ndarray
    H: np.ndarray
    V: np.ndarray
    precision: float
    process_var: float

    @property
    def n(self) -> int:
        return self.info.shape[0]

    def _sampling(self, d) -> np.ndarray:
        return self.precision * symmetrize((self.V.T * d) @ self.V)

    def z1(self, d_now) -> np.ndarray:
        S = spd_inverse(symmetrize(self.info + self._sampling(d_now)))
        return symmetrize(-self.H @ S @ self.H.T) - self.process_var * np.eye(self.n)

    def z1_inverse(self, d_now) -> np.ndarray:
        return -spd_inverse(-self.z1(d_now))

    def z2(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        d_now, d_next = d[: self.n], d[self.n :]
        return self.z1_inverse(d_now) - self._sampling(d_next)

    def second_term(self, d) -> float:
        return neg_trace_inverse(self.z2(d))


def random_pieces(n: int, rng: np.random.Generator, precision: float = 2.0, process_var: float = 0.1) -> TwoStepPieces:
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = np.diag(rng.standard_normal(n))
    return TwoStepPieces(random_spd(n, rng), H, V, precision, process_var)
