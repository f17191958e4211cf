"""
Motif moments of an affiliation blockmodel
==========================================

Closed-form motif moments, checked against brute-force enumeration of every
latent assignment and edge configuration, then against one sampled graph.
"""

# %%
import numpy as np

from sbm_ident import (MOTIFS, AffiliationParams, empirical_moments, exact_distribution,
                       exact_motif_moment, sample_graph, theoretical_moments)

params = AffiliationParams(pi=[0.3, 0.7], alpha=0.8, beta=0.2)
closed = theoretical_moments(params)

# %%
# Enumerating K_4 means 2^4 latent vectors times 2^6 configurations.
dist = exact_distribution(params, 4)
print(f"{'motif':<6}{'closed form':>14}{'enumeration':>14}")
for name, edges in MOTIFS.items():
    print(f"{name:<6}{getattr(closed, name):>14.10f}{exact_motif_moment(dist, edges):>14.10f}")

# %%
# One graph on 1500 nodes. The empirical moments average over node tuples.
g = sample_graph(params, 1500, seed=7)
emp = empirical_moments(g)
for name in ("m1", "m2", "m31", "m41", "m6"):
    print(f"{name:<4} closed {getattr(closed, name):.4f}   sampled {getattr(emp, name):.4f}")
