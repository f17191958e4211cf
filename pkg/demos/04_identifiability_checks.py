"""
Numerical identifiability checks
=================================

Generic full-rank claims probed at random parameters: the conditional matrix
of configurations given node states, Kruskal ranks, and the degree
sequences used to find independent columns.
"""

# %%
import numpy as np

from sbm_ident import (BinaryBlockParams, FiniteStateParams, build_conditional_matrix,
                       build_degree_family, check_base_case, kruskal_rank, kruskal_report)
from sbm_ident._linalg import numerical_rank

rng = np.random.default_rng(3)

# %%
# Binary model, two groups, five nodes: 32 latent rows against 1024 configurations.
P = rng.uniform(size=(2, 2))
P = np.triu(P) + np.triu(P, 1).T
report = check_base_case(BinaryBlockParams([0.4, 0.6], P), 5)
print(report.rank, "of", report.rows, "rows; node bound", report.node_bound)
print(report.kruskal_arithmetic)

# %%
# Three edge states on three nodes: rank 8 for random state vectors.
v = rng.dirichlet(np.ones(3), size=3)
fsp = FiniteStateParams([0.5, 0.5], [[v[0], v[1]], [v[1], v[2]]])
print("rank of A:", numerical_rank(build_conditional_matrix(fsp, 3).matrix))

# %%
# Kruskal ranks and the uniqueness condition for a random three-way array.
M = [rng.normal(size=(4, 5)) for _ in range(3)]
M[2][3] = M[2][0] + M[2][1]
print([kruskal_rank(m) for m in M], kruskal_report(*M))

# %%
family = build_degree_family(2, 5)
print(len(family), "degree sequences,", sum(s.realizable for s in family), "realizable")
print([s.degrees for s in family[:4]])
