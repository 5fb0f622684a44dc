"""Relaxed two-step sampling problem and its projected-gradient solver.

For prior information ``J`` at step ``t`` and relaxed sampling weights
``d_now, d_next`` in [0, 1]^n the cost is

    tr(J + s V^T diag(d_now) V)^{-1}
        + gamma * tr(F(J, d_now) + s V^T diag(d_next) V)^{-1}

with ``s = 1 / sigma_w^2`` and ``F`` the filter's information transition to
``t + 1``. The feasible set couples the two steps through the shared budget
``sum(d_now) + sum(d_next) = 2M`` and the per-step caps.

Everything is evaluated in the vertex domain: since ``V`` is orthogonal,
``tr(J + s V^T D V)^{-1} = tr(V J V^T + s D)^{-1}``, so sampling enters as a
diagonal shift and the gradient is a vector of diagonal entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EvolutionModel, ObservationNoise
from .graph_core import SpectralBasis
from .spectral_kalman import spd_inverse, symmetrize


@dataclass(frozen=True)
class BudgetParams:
    """Average budget ``M``, per-step caps and the discount factor."""

    avg_budget: int
    step_cap: int
    discount: float
    next_cap: int | None = None

    def __post_init__(self):
        if self.next_cap is None:
            object.__setattr__(self, "next_cap", self.step_cap)
        if self.avg_budget < 0:
            raise ValueError("average budget must be >= 0")
        if self.avg_budget > self.step_cap:
            raise ValueError(f"average budget {self.avg_budget} exceeds step cap {self.step_cap}")
        if 2 * self.avg_budget > self.step_cap + self.next_cap:
            raise ValueError("two-step budget 2M exceeds the sum of the step caps")
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")

    @property
    def total(self) -> float:
        return 2 * self.avg_budget

    def check_size(self, n: int) -> None:
        if self.avg_budget > n:
            raise ValueError(f"average budget {self.avg_budget} exceeds vertex count {n}")
        if self.step_cap > n or self.next_cap > n:
            raise ValueError(f"step caps ({self.step_cap}, {self.next_cap}) exceed vertex count {n}")


@dataclass(frozen=True)
class RelaxedDecision:
    d_now: np.ndarray
    d_next: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.d_now, dtype=float)
        b = np.asarray(self.d_next, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("d_now and d_next must be vectors of equal length")
        object.__setattr__(self, "d_now", a)
        object.__setattr__(self, "d_next", b)

    @property
    def n(self) -> int:
        return self.d_now.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.d_now, self.d_next])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "RelaxedDecision":
        n = x.size // 2
        return cls(x[:n].copy(), x[n:].copy())

    def is_feasible(self, budget: BudgetParams, tol: float = 1e-7) -> bool:
        x = self.as_vector()
        s_now, s_next = self.d_now.sum(), self.d_next.sum()
        return bool(
            x.min(initial=0.0) >= -tol
            and x.max(initial=0.0) <= 1 + tol
            and s_now <= budget.step_cap + tol
            and s_next <= budget.next_cap + tol
            and abs(s_now + s_next - budget.total) <= tol
        )


class TwoStepProblem:
    """Two-step cost for a fixed prior information matrix, model and step."""

    def __init__(
        self,
        P_inv: np.ndarray,
        basis: SpectralBasis,
        model: EvolutionModel,
        noise: ObservationNoise,
        discount: float,
        t: int,
    ):
        P_inv = np.asarray(P_inv, dtype=float)
        n = basis.n
        if P_inv.shape != (n, n):
            raise ValueError(f"information matrix must be {n} x {n}")
        # raises NotPositiveDefiniteError for non-SPD input
        spd_inverse(symmetrize(P_inv))
        V = basis.eigenvectors
        self.n = n
        self.info = symmetrize(V @ P_inv @ V.T)
        self.H = V @ model.spectral_operator_at(t + 1) @ V.T
        self.precision = noise.precision
        self.process_var = model.process_noise_var
        self.discount = discount

    def _posterior(self, d_now):
        return spd_inverse(self.info + np.diag(self.precision * d_now))

    def _next_info(self, S):
        Q = symmetrize(self.H @ S @ self.H.T) + self.process_var * np.eye(self.n)
        return spd_inverse(Q)

    def terms(self, d_now, d_next) -> tuple[float, float]:
        S = self._posterior(d_now)
        B = self._next_info(S)
        T = spd_inverse(B + np.diag(self.precision * d_next))
        return float(np.trace(S)), float(np.trace(T))

    def value(self, d_now, d_next) -> float:
        c_now, c_next = self.terms(d_now, d_next)
        return c_now + self.discount * c_next

    def value_and_grad(self, d_now, d_next) -> tuple[float, np.ndarray, np.ndarray]:
        s, gamma = self.precision, self.discount
        S = self._posterior(d_now)
        B = self._next_info(S)
        T = spd_inverse(B + np.diag(s * d_next))
        value = float(np.trace(S)) + gamma * float(np.trace(T))
        # d tr(X^-1) = -tr(X^-1 dX X^-1), chained through the information transition
        R = B @ self.H @ S
        g_now = -s * np.einsum("ij,ij->j", S, S) - gamma * s * np.sum((T @ R) ** 2, axis=0)
        g_next = -gamma * s * np.einsum("ij,ij->j", T, T)
        return value, g_now, g_next


def _check_weights(dec: RelaxedDecision, n: int) -> None:
    if dec.n != n:
        raise ValueError(f"decision has length {dec.n}, expected {n}")
    x = dec.as_vector()
    if x.min(initial=0.0) < -1e-12 or x.max(initial=0.0) > 1 + 1e-12:
        raise ValueError("relaxed sampling weights must lie in [0, 1]")


def two_step_objective(P_inv, dec: RelaxedDecision, basis, model, noise, params: BudgetParams, t: int) -> float:
    problem = TwoStepProblem(P_inv, basis, model, noise, params.discount, t)
    _check_weights(dec, problem.n)
    return problem.value(dec.d_now, dec.d_next)


def two_step_gradient(P_inv, dec: RelaxedDecision, basis, model, noise, params: BudgetParams, t: int):
    """Exact gradient of :func:`two_step_objective` wrt ``(d_now, d_next)``."""
    problem = TwoStepProblem(P_inv, basis, model, noise, params.discount, t)
    _check_weights(dec, problem.n)
    _, g_now, g_next = problem.value_and_grad(dec.d_now, dec.d_next)
    return g_now, g_next


def project_capped_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{x in [0,1]^n : sum(x) = total}``.

    The solution is ``clip(v - tau, 0, 1)``; the sum is piecewise linear and
    nonincreasing in ``tau`` with kinks at ``v_i`` and ``v_i - 1``, so ``tau``
    is found exactly by locating the right segment.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if total < -1e-12 or total > n + 1e-12:
        raise ValueError(f"sum {total} unreachable in [0,1]^{n}")
    if total <= 0:
        return np.zeros(n)
    if total >= n:
        return np.ones(n)
    kinks = np.unique(np.concatenate([v, v - 1.0]))
    sums = np.clip(v[None, :] - kinks[:, None], 0.0, 1.0).sum(axis=1)
    # sums is nonincreasing along increasing kinks
    k = int(np.searchsorted(-sums, -total, side="right")) - 1
    k = min(max(k, 0), kinks.size - 2)
    lo, hi = kinks[k], kinks[k + 1]
    s_lo, s_hi = sums[k], sums[k + 1]
    tau = lo if s_lo == s_hi else lo + (s_lo - total) * (hi - lo) / (s_lo - s_hi)
    return np.clip(v - tau, 0.0, 1.0)


def project_feasible(d_now, d_next, budget: BudgetParams) -> RelaxedDecision:
    """Euclidean projection onto the relaxed two-step feasible set.

    Without the per-step caps the set is a capped simplex in 2n dimensions.
    If its projection breaks one cap, that cap is active at the optimum and
    the problem splits into two capped simplices with fixed sums. Both caps
    cannot be broken at once because ``2M <= M_t + M_{t+1}``.
    """
    a = np.asarray(d_now, dtype=float)
    b = np.asarray(d_next, dtype=float)
    n = a.size
    budget.check_size(n)
    total = budget.total
    z = project_capped_simplex(np.concatenate([a, b]), total)
    za, zb = z[:n], z[n:]
    if za.sum() > budget.step_cap:
        za = project_capped_simplex(a, budget.step_cap)
        zb = project_capped_simplex(b, total - budget.step_cap)
    elif zb.sum() > budget.next_cap:
        za = project_capped_simplex(a, total - budget.next_cap)
        zb = project_capped_simplex(b, budget.next_cap)
    return RelaxedDecision(za, zb)


@dataclass(frozen=True)
class SolverOptions:
    initial_step: float = 1.0
    armijo: float = 1e-4
    shrink: float = 0.5
    tol: float = 1e-6
    max_iter: int = 2000


@dataclass
class SolverDiagnostics:
    iterations: int
    grad_norm: float
    converged: bool
    objective_trace: list[float] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _stationarity(x, g, project) -> float:
    # fixed-point residual with the step scaled so the largest gradient entry is 1
    gmax = np.abs(g).max(initial=0.0)
    if gmax == 0:
        return 0.0
    return float(np.abs(x - project(x - g / gmax)).max())


def solve_relaxed(
    P_inv,
    basis: SpectralBasis,
    model: EvolutionModel,
    noise: ObservationNoise,
    budget: BudgetParams,
    t: int,
    options: SolverOptions | None = None,
) -> tuple[RelaxedDecision, SolverDiagnostics]:
    """Minimize the two-step cost over the relaxed feasible set.

    Projected gradient descent from the uniform point ``(M/n) 1`` with
    Barzilai-Borwein trial steps and Armijo backtracking along the
    projection arc, so accepted steps never increase the objective.
    """
    options = options or SolverOptions()
    n = basis.n
    budget.check_size(n)
    problem = TwoStepProblem(P_inv, basis, model, noise, budget.discount, t)

    def project(x):
        return project_feasible(x[:n], x[n:], budget).as_vector()

    def value_grad(x):
        f, ga, gb = problem.value_and_grad(x[:n], x[n:])
        return f, np.concatenate([ga, gb])

    x = np.full(2 * n, budget.avg_budget / n)
    f, g = value_grad(x)
    trace = [f]
    gmax = np.abs(g).max(initial=0.0)
    step = options.initial_step / gmax if gmax > 0 else options.initial_step
    res = _stationarity(x, g, project)
    converged = res < options.tol
    it = 0
    while not converged and it < options.max_iter:
        it += 1
        alpha = step
        while True:
            x_new = project(x - alpha * g)
            f_new = problem.value(x_new[:n], x_new[n:])
            if f_new <= f + options.armijo * float(g @ (x_new - x)):
                break
            alpha *= options.shrink
            if alpha < 1e-14 * step:
                x_new, f_new = x, f
                break
        if x_new is x:
            # line search exhausted: no descent at machine precision
            break
        f_new, g_new = value_grad(x_new)
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 2.0 * alpha
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        res = _stationarity(x, g, project)
        converged = res < options.tol
    dec = RelaxedDecision.from_vector(x)
    return dec, SolverDiagnostics(it, res, converged, trace)
