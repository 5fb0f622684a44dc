"""Sampling policies: the two-step budget-allocating policy and baselines.

``policy_proposed`` plans two steps at once (relaxed solve, then rounding).
The baselines use a fixed budget per step:

* ``policy_greedy_instant`` ("M2-style") greedily minimizes the current
  posterior trace, so it sees the evolution through ``P-`` but not the future;
* ``policy_info_gain`` ("M1-style") greedily maximizes the log-determinant of
  the static prior information plus sampling information;
* ``policy_random`` draws a uniform subset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import EvolutionModel, ObservationNoise, SignalPrior
from .graph_core import SpectralBasis
from .sampling_optimizer import (
    BudgetParams,
    RelaxedDecision,
    SolverDiagnostics,
    SolverOptions,
    solve_relaxed,
)
from .spectral_kalman import FilterState, Prediction, predict, symmetrize

POLICY_NAMES = ("proposed", "greedy-instant", "info-gain", "random")
POLICY_LABELS = {
    "proposed": "proposed",
    "greedy-instant": "M2-style",
    "info-gain": "M1-style",
    "random": "random",
}


@dataclass(frozen=True)
class SamplingPlan:
    step_budgets: tuple[int, int]
    vertex_sets: tuple[tuple[int, ...], tuple[int, ...]]
    decision: RelaxedDecision | None = None
    diagnostics: SolverDiagnostics | None = None

    def __post_init__(self):
        for k, (m, vs) in enumerate(zip(self.step_budgets, self.vertex_sets)):
            if len(vs) != m:
                raise ValueError(f"step {k}: budget {m} but {len(vs)} vertices")
            if len(set(vs)) != len(vs) or list(vs) != sorted(vs):
                raise ValueError(f"step {k}: vertex set must be sorted and duplicate-free")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def top_k(values: np.ndarray, k: int, rtol: float = 1e-12) -> tuple[int, ...]:
    """Indices of the ``k`` largest values; near-ties go to the lowest index."""
    values = np.asarray(values, dtype=float)
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    keys = np.round(values / (rtol * scale)) if rtol > 0 else values
    order = np.argsort(-keys, kind="stable")
    return tuple(sorted(int(i) for i in order[:k]))


def _argmax_lowest(values: np.ndarray, rtol: float = 1e-12) -> int:
    best = values.max()
    tol = rtol * max(abs(best), 1e-300)
    return int(np.flatnonzero(values >= best - tol)[0])


def round_and_select(dec: RelaxedDecision, budget: BudgetParams) -> SamplingPlan:
    """Integer budgets and vertex sets from a relaxed decision.

    ``M*_t = round(sum(d_now))`` (halves round up), clamped so both budgets
    respect their caps; ``M*_{t+1} = 2M - M*_t``. Each step samples the
    vertices with the largest relaxed weights.
    """
    total = 2 * int(budget.avg_budget)
    lo = max(0, total - budget.next_cap)
    hi = min(budget.step_cap, total)
    m_now = min(max(_round_half_up(float(dec.d_now.sum())), lo), hi)
    m_next = total - m_now
    sets = (top_k(dec.d_now, m_now), top_k(dec.d_next, m_next))
    return SamplingPlan((m_now, m_next), sets, dec)


def policy_proposed(
    state: FilterState,
    basis: SpectralBasis,
    model: EvolutionModel,
    noise: ObservationNoise,
    budget: BudgetParams,
    t: int,
    options: SolverOptions | None = None,
) -> SamplingPlan:
    """Plan the sampling sets for steps ``t`` and ``t + 1``.

    Runs the filter's time update to get ``P-_t``, solves the relaxed
    two-step problem and rounds. The caller executes the first set at ``t``
    and the second at ``t + 1`` without re-planning.
    """
    pred = predict(state, model, t)
    dec, diag = solve_relaxed(pred.information, basis, model, noise, budget, t, options)
    plan = round_and_select(dec, budget)
    return SamplingPlan(plan.step_budgets, plan.vertex_sets, dec, diag)


def policy_greedy_instant(
    pred: Prediction,
    basis: SpectralBasis,
    noise: ObservationNoise,
    budget_per_step: int,
) -> tuple[int, ...]:
    # rank-one updates in the vertex domain: adding vertex i lowers the trace
    # by s * ||S e_i||^2 / (1 + s * S_ii)
    V = basis.eigenvectors
    S = symmetrize(V @ pred.prior_cov @ V.T)
    s = noise.precision
    chosen: list[int] = []
    available = np.ones(basis.n, dtype=bool)
    for _ in range(budget_per_step):
        gain = s * np.einsum("ij,ij->j", S, S) / (1.0 + s * np.diag(S))
        gain[~available] = -np.inf
        i = _argmax_lowest(gain)
        col = S[:, i].copy()
        S = S - np.outer(col, col) * (s / (1.0 + s * col[i]))
        chosen.append(i)
        available[i] = False
    return tuple(sorted(chosen))


def policy_info_gain(
    basis: SpectralBasis,
    prior: SignalPrior,
    noise: ObservationNoise,
    budget_per_step: int,
) -> tuple[int, ...]:
    # logdet(C^-1 + s v v^T) - logdet(C^-1) = log(1 + s v^T C v)
    V = basis.eigenvectors
    C = symmetrize((V * prior.covariance_diag) @ V.T)
    s = noise.precision
    chosen: list[int] = []
    available = np.ones(basis.n, dtype=bool)
    for _ in range(budget_per_step):
        gain = np.log1p(s * np.diag(C))
        gain[~available] = -np.inf
        i = _argmax_lowest(gain)
        col = C[:, i].copy()
        C = C - np.outer(col, col) * (s / (1.0 + s * col[i]))
        chosen.append(i)
        available[i] = False
    return tuple(sorted(chosen))


def policy_random(n: int, budget_per_step: int, rng: np.random.Generator) -> tuple[int, ...]:
    if not 0 <= budget_per_step <= n:
        raise ValueError(f"budget {budget_per_step} outside [0, {n}]")
    return tuple(sorted(int(i) for i in rng.choice(n, size=budget_per_step, replace=False)))
