"""
Recovering a weighted blockmodel from its triangle mixture
==========================================================

Edge weights are zero with some probability and truncated Poisson otherwise.
The joint law of the three weights on a triangle is a finite mixture of
product measures, and its components pin down every parameter.
"""

# %%
import numpy as np

from sbm_ident import (WeightedParams, discretize, expand_k3_mixture, expand_kn_mixture,
                       recover_affiliation_priors, recover_from_k3)
from sbm_ident.mixture import edge_marginal

params = WeightedParams(pi=[0.35, 0.65],
                        sparsity=[[0.9, 0.4], [0.4, 0.7]],
                        theta=[[1.0, 2.5], [2.5, 4.0]])
mixture = expand_k3_mixture(params)
print(f"{len(mixture.components)} mixture components on the triangle")

# %%
rec = recover_from_k3(mixture, edge_marginal(params))
print("pi      ", rec.pi)
print("sparsity\n", rec.sparsity)
print("theta   \n", rec.theta)

# %%
# Affiliation case: K_2 .. K_Q mixtures give the power sums of the priors.
aff = WeightedParams.affiliation([0.1, 0.2, 0.3, 0.4], alpha=0.85, beta=0.3,
                                 theta_in=3.0, theta_out=1.2)
mixtures = {n: expand_kn_mixture(aff, n) for n in (2, 3, 4)}
summary, pi = recover_affiliation_priors(mixtures, Q=4)
print(summary)
print("pi", np.round(pi, 12))

# %%
# Cutpoints 1 and 3 give three states: weight at most 1 (absent edges included),
# weight in (1, 3], and weight above 3.
fsp = discretize(params, [1, 3])
print("state probabilities for the (1, 1) block:", np.round(fsp.Pvec[0, 0], 4))
