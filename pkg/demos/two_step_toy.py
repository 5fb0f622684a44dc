"""
One planning step, up close
===========================

On a six-vertex graph we can enumerate every way to spend a two-step budget
of four samples. This script compares the relaxed-then-rounded plan with
the exhaustive optimum and with two greedy steps.
"""

import itertools

import numpy as np

from gstrack import (
    BudgetParams,
    EvolutionModel,
    FilterState,
    ObservationNoise,
    TwoStepProblem,
    graph_basis,
    heat_source_trajectory,
    policy_greedy_instant,
    policy_proposed,
    predict,
    random_geometric_graph,
    translation_operator,
    update,
)

rng = np.random.default_rng(3)
n = 6
g = random_geometric_graph(n, 0.6, rng, require_connected=True)
basis = graph_basis(g)
path = heat_source_trajectory(g, 0, 10, rng)
model = EvolutionModel(n, lambda t: translation_operator(basis, path[t], np.sqrt(n)), 1e-4)
noise = ObservationNoise(1e-3)

# Run a few steps so the filter is in its operating regime.
state = FilterState.from_prior(np.ones(n), np.eye(n))
for t in range(1, 5):
    pred = predict(state, model, t)
    s = policy_greedy_instant(pred, basis, noise, 2)
    state = update(pred, np.zeros(2), s, basis, noise)

t = 5
budget = BudgetParams(avg_budget=2, step_cap=4, discount=0.8)
pred = predict(state, model, t)
problem = TwoStepProblem(pred.information, basis, model, noise, budget.discount, t)


def cost(s1, s2):
    d1, d2 = np.zeros(n), np.zeros(n)
    d1[list(s1)] = 1
    d2[list(s2)] = 1
    return problem.value(d1, d2)


# %%
# Exhaustive search over (set now, set next) with sizes summing to 4

best = min(
    (cost(s1, s2), s1, s2)
    for m in range(5)
    for s1 in itertools.combinations(range(n), m)
    for s2 in itertools.combinations(range(n), 4 - m)
)
print(f"exhaustive optimum {best[0]:.5f} with sets {best[1]} / {best[2]}")

# %%
# Relaxation, projected gradient, rounding

plan = policy_proposed(state, basis, model, noise, budget, t)
print(f"relaxed optimum    {plan.diagnostics.objective:.5f} ({plan.diagnostics.iterations} iterations)")
print(f"rounded plan       {cost(*plan.vertex_sets):.5f} with sets {plan.vertex_sets}")
print("relaxed weights now :", np.round(plan.decision.d_now, 3))
print("relaxed weights next:", np.round(plan.decision.d_next, 3))

# %%
# Greedy, two steps of two

g1 = policy_greedy_instant(pred, basis, noise, 2)
after = update(pred, np.zeros(2), g1, basis, noise)
g2 = policy_greedy_instant(predict(after, model, t + 1), basis, noise, 2)
print(f"greedy             {cost(g1, g2):.5f} with sets {g1} / {g2}")
