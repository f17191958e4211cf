"""Exact distribution of the edge variables on ``n`` nodes by enumeration.

Every latent assignment ``z`` in ``{0..Q-1}^n`` is visited; conditional on
``z`` the edges are independent, so the conditional law of a configuration is
a Kronecker product of per-edge state vectors. Configurations are indexed by
the edge states in lexicographic edge order ``(1,2), (1,3), ..., (n-1,n)``
with the first edge most significant (``itertools.product`` order).

Nodes are 1-based in this module's public API, matching the edge-list format.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import SizeGuardError
from .models import ModelParams, as_block, ensure_valid

MAX_LATENT = 10**7
MAX_CONFIGS = 10**7
SCAN_EPSILON = 1e-9
# entries per chunk of the (assignments x configurations) work array
_CHUNK_ENTRIES = 1 << 22


def edge_list(n: int) -> list[tuple[int, int]]:
    """Edges of ``K_n`` as 1-based pairs in the canonical order."""
    return list(itertools.combinations(range(1, n + 1), 2))


def edge_position(n: int) -> dict[tuple[int, int], int]:
    return {e: k for k, e in enumerate(edge_list(n))}


def latent_assignments(Q: int, m: int) -> NDArray[np.int64]:
    """All of ``{0..Q-1}^m`` in lexicographic order, shape ``(Q**m, m)``."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((Q,) * m).reshape(m, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


def conditional_rows(state_probs: NDArray, assignments: NDArray) -> NDArray[np.float64]:
    """Conditional configuration probabilities for each row of ``assignments``.

    ``state_probs[q, l]`` is the edge-state distribution for groups ``(q, l)``.
    Returns shape ``(len(assignments), kappa ** (m choose 2))``.
    """
    m = assignments.shape[1]
    rows = np.ones((len(assignments), 1))
    for i, j in itertools.combinations(range(m), 2):
        per_edge = state_probs[assignments[:, i], assignments[:, j]]
        rows = (rows[:, :, None] * per_edge[:, None, :]).reshape(len(assignments), -1)
    return rows


@dataclass(frozen=True)
class ExactDistribution:
    """Probability table over all edge configurations of ``K_n``."""

    n: int
    kappa: int
    probs: NDArray[np.float64]

    @property
    def n_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def as_tensor(self) -> NDArray[np.float64]:
        """The table reshaped to one axis per edge."""
        return self.probs.reshape((self.kappa,) * self.n_edges)

    def configurations(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(range(self.kappa), repeat=self.n_edges)

    def prob(self, config: Sequence[int]) -> float:
        return float(self.as_tensor()[tuple(config)])


def _check_guards(Q: int, kappa: int, n: int) -> None:
    if Q**n > MAX_LATENT:
        raise SizeGuardError("latent", f"Q^n = {Q}^{n} exceeds {MAX_LATENT}")
    if kappa ** (n * (n - 1) // 2) > MAX_CONFIGS:
        raise SizeGuardError("configs", f"kappa^(n choose 2) = {kappa}^{n * (n - 1) // 2} exceeds {MAX_CONFIGS}")


def exact_distribution(params: ModelParams, n: int) -> ExactDistribution:
    """Exact law of ``K_n`` for binary, affiliation or finite-state parameters."""
    ensure_valid(params)
    block = as_block(params)
    Q, kappa = block.Q, block.kappa
    _check_guards(Q, kappa, n)

    sp = block.state_probs()
    n_configs = kappa ** (n * (n - 1) // 2)
    probs = np.zeros(n_configs)
    Z = latent_assignments(Q, n)
    weights = np.prod(block.pi[Z], axis=1)
    chunk = max(1, _CHUNK_ENTRIES // n_configs)
    # fixed chunk order keeps the floating-point reduction reproducible
    for start in range(0, len(Z), chunk):
        rows = conditional_rows(sp, Z[start:start + chunk])
        probs += weights[start:start + chunk] @ rows
    return ExactDistribution(n, kappa, probs)


def _motif_axes(dist: ExactDistribution, motif: Iterable[tuple[int, int]]) -> list[int]:
    pos = edge_position(dist.n)
    axes = set()
    for a, b in motif:
        i, j = min(a, b), max(a, b)
        if i < 1 or j > dist.n or i == j:
            raise ValueError(f"motif edge ({a}, {b}) is not an edge of K_{dist.n}")
        axes.add(pos[(i, j)])
    return sorted(axes)


def exact_motif_moment(dist: ExactDistribution, motif: Iterable[tuple[int, int]]) -> float:
    """``E[prod_{e in motif} X_e]`` for a binary distribution (1-based edges)."""
    if dist.kappa != 2:
        raise ValueError("motif moments need a binary distribution")
    axes = _motif_axes(dist, motif)
    T = dist.as_tensor()
    index = tuple(1 if k in axes else slice(None) for k in range(dist.n_edges))
    return float(np.sum(T[index]))


def marginalize_edge(dist: ExactDistribution, edge: tuple[int, int]) -> NDArray[np.float64]:
    """Sum out one edge; returns the tensor over the remaining edges."""
    (axis,) = _motif_axes(dist, [edge])
    return dist.as_tensor().sum(axis=axis)


def subset_expectations(dist: ExactDistribution) -> NDArray[np.float64]:
    """``E[prod_{e in S} X_e]`` for every edge subset ``S`` of ``K_n``.

    Entry ``mask`` corresponds to the subset whose bit ``k`` (bit 0 = first
    edge in canonical order) marks edge ``k``.
    """
    if dist.kappa != 2:
        raise ValueError("subset expectations need a binary distribution")
    E = dist.n_edges
    # superset-sum transform over the boolean lattice, one edge axis at a time
    T = dist.as_tensor().copy()
    for axis in range(E):
        T = np.moveaxis(T, axis, 0)
        T = np.stack([T[0] + T[1], T[1]])
        T = np.moveaxis(T, 0, axis)
    # T[b_0, ..., b_{E-1}] where b_k = 1 means "edge k in S"
    out = np.empty(1 << E)
    flat = T.reshape(-1)
    for mask in range(1 << E):
        idx = 0
        for k in range(E):
            idx = idx * 2 + ((mask >> k) & 1)
        out[mask] = flat[idx]
    return out


def _canonical(params: ModelParams) -> tuple:
    """Parameters with groups sorted so label-swapped copies coincide."""
    block = as_block(params)
    sp = block.state_probs()
    keys = [(block.pi[q], *np.sort(sp[q, q]).tolist()) for q in range(block.Q)]
    order = sorted(range(block.Q), key=lambda q: (keys[q], tuple(sp[q].ravel())))
    perm = np.array(order)
    return (block.pi[perm], sp[np.ix_(perm, perm)])


def identifiability_scan(grid: Sequence[ModelParams], n: int,
                         epsilon: float = SCAN_EPSILON) -> list[list[int]]:
    """Group grid points whose laws on ``K_n`` agree within ``epsilon`` (max norm).

    Label-swapped copies are merged before any distribution is computed.
    Returns lists of grid indices, each sorted, ordered by first member.
    """
    parent = list(range(len(grid)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    canon = [_canonical(p) for p in grid]
    for i in range(len(grid)):
        for j in range(i):
            (pi_i, sp_i), (pi_j, sp_j) = canon[i], canon[j]
            if pi_i.shape == pi_j.shape and sp_i.shape == sp_j.shape \
                    and np.allclose(pi_i, pi_j, rtol=0, atol=1e-15) \
                    and np.allclose(sp_i, sp_j, rtol=0, atol=1e-15):
                union(i, j)

    reps = sorted({find(i) for i in range(len(grid))})
    dists = {r: exact_distribution(grid[r], n).probs for r in reps}
    for a, ra in enumerate(reps):
        for rb in reps[:a]:
            pa, pb = dists[ra], dists[rb]
            if pa.shape == pb.shape and np.max(np.abs(pa - pb)) <= epsilon:
                union(ra, rb)

    classes: dict[int, list[int]] = {}
    for i in range(len(grid)):
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values(), key=lambda c: c[0])
