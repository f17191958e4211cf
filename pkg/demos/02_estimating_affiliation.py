"""
Estimating an affiliation model from motif moments
==================================================

Three estimators: the K_3 cubic for two groups, the known-prior formulas,
and group counting under uniform priors. A single-group statistic flags
graphs with no community structure.
"""

# %%
import numpy as np

from sbm_ident import (AffiliationParams, empirical_moments, estimate_k3_q2, estimate_known_pi,
                       estimate_q_uniform, q1_statistic, replicate_seed, sample_graph,
                       theoretical_moments)

truth = AffiliationParams(pi=[0.3, 0.7], alpha=0.8, beta=0.2)

# %%
# From exact moments the cubic returns the parameters to rounding error.
r = estimate_k3_q2(theoretical_moments(truth))
print("exact moments:", r.alpha, r.beta, r.pi)

# %%
# From sampled graphs the estimate scatters around the truth.
alphas = []
for i in range(5):
    g = sample_graph(truth, 800, seed=replicate_seed(11, i))
    alphas.append(estimate_k3_q2(empirical_moments(g, upto="K3")).alpha)
print("alpha over 5 graphs of 800 nodes:", np.round(alphas, 3))

# %%
# Known priors: a rational formula, or a cube root when the priors are uniform.
print(estimate_known_pi(theoretical_moments(truth), truth.pi))
uniform = AffiliationParams.uniform(2, 0.8, 0.2)
print(estimate_known_pi(theoretical_moments(uniform), uniform.pi))

# %%
# With uniform priors the number of groups is itself a function of the moments.
for Q in (2, 3, 4):
    r = estimate_q_uniform(theoretical_moments(AffiliationParams.uniform(Q, 0.7, 0.25)))
    print(f"Q = {Q}: recovered Q = {r.Q}, Q_raw = {r.diagnostics['Q_raw']:.9f}")

# %%
# The statistic vanishes without community structure.
print("q1, one group:   ", q1_statistic(theoretical_moments(AffiliationParams([1.0], 0.4, 0.4))))
print("q1, two groups:  ", q1_statistic(theoretical_moments(uniform)))
