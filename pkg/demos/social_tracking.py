"""
Tracking opinions on a community network
========================================

Seventy agents in seven communities hold opinions in [0, 1]. Opinions evolve
by bounded-confidence averaging: each agent moves to the mean of everyone
within 0.3 of its own view. We track the (energy-normalized) opinion
profile in the Fourier basis of the community graph, observing 10 agents per
step with a little noise.
"""

import numpy as np

from gstrack import accumulated_error, build_scenario, make_config, run_scenario

cfg = make_config("social", seed=0)
sc = build_scenario(cfg)
V = sc.basis.eigenvectors

# %%
# The opinion dynamics
# --------------------
# Opinions quickly merge into a few clusters. Count distinct clusters
# (rounded to two decimals) at a few times.

for t in (0, 1, 5, 20, cfg.horizon):
    clusters = np.unique(np.round(V @ sc.truth[t], 2)).size
    print(f"t={t:3d}: {clusters} opinion clusters")

# %%
# Random edge sampling
# --------------------
# Each step only a random half of the friendships are active.

counts = sc.info["res_edge_counts"]
print(f"base graph {sc.graph.num_edges} edges, active per step {np.mean(counts):.1f} on average")

# %%
# Policies
# --------

reports = run_scenario(cfg)
for name, rep in reports.items():
    print(f"{rep.label:10s} accumulated NMSE {accumulated_error(rep):.4f}")
