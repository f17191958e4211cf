"""Draw random graphs from any of the blockmodel families.

Latent groups are drawn i.i.d. from ``pi``; edges are then independent given
the groups of their endpoints. Edge values are stored in lexicographic pair
order ``(0,1), (0,2), ..., (n-2,n-1)``, i.e. the order of
``numpy.triu_indices(n, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from .models import (
    AffiliationParams,
    BinaryBlockParams,
    FiniteStateParams,
    ModelParams,
    WeightedParams,
    affiliation_to_block,
    ensure_valid,
)

SeedLike = Union[int, np.random.Generator, None]

# below this rate rejection from Poisson wastes > 90% of draws
_REJECTION_MIN_RATE = 0.1


@dataclass(frozen=True)
class SampledGraph:
    """An observed graph on ``n`` nodes.

    ``kind`` is ``"binary"``, ``"finite"`` or ``"weighted"``. ``edges`` has
    ``n * (n - 1) / 2`` entries; for weighted graphs 0 means absent. ``z``
    holds the latent groups only when sampling was asked to keep them.
    """

    n: int
    kind: str
    edges: NDArray
    z: Optional[NDArray[np.int64]] = None
    kappa: Optional[int] = None

    def __post_init__(self) -> None:
        expected = self.n * (self.n - 1) // 2
        if len(self.edges) != expected:
            raise ValueError(f"expected {expected} edge entries for n={self.n}, got {len(self.edges)}")

    def pairs(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """0-based endpoint arrays in the storage order."""
        return np.triu_indices(self.n, 1)

    def adjacency(self) -> NDArray:
        """Dense symmetric matrix of edge values with a zero diagonal."""
        A = np.zeros((self.n, self.n), dtype=self.edges.dtype)
        iu, ju = self.pairs()
        A[iu, ju] = self.edges
        A[ju, iu] = self.edges
        return A


def replicate_seed(seed: int, i: int) -> int:
    """Seed for replicate ``i`` of a batch started from ``seed``.

    Hashes ``(seed, i)`` through :class:`numpy.random.SeedSequence` so that
    replicates are independent and reproducible in any execution order.
    """
    return int(np.random.SeedSequence([seed, i]).generate_state(1, dtype=np.uint64)[0])


def sample_truncated_poisson(theta: float, seed: SeedLike = None, size=None):
    """Draw from the Poisson law with rate ``theta`` conditioned on ``k >= 1``.

    Rejection from an ordinary Poisson for ``theta >= 0.1``; for smaller rates
    a sequential inverse-CDF scan, where ``k = 1`` already carries more than
    95% of the mass.
    """
    theta = float(theta)
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    rng = np.random.default_rng(seed)
    count = 1 if size is None else int(np.prod(size))

    if theta >= _REJECTION_MIN_RATE:
        out = rng.poisson(theta, size=count)
        zero = out == 0
        while zero.any():
            out[zero] = rng.poisson(theta, size=int(zero.sum()))
            zero = out == 0
    else:
        u = rng.random(count)
        out = np.ones(count, dtype=np.int64)
        pmf = theta / np.expm1(theta)
        cdf = pmf
        k = 1
        pending = u > cdf
        while pending.any():
            k += 1
            pmf *= theta / k
            cdf += pmf
            out[pending] = k
            pending &= u > cdf
            if pmf == 0.0:
                break

    if size is None:
        return int(out[0])
    return out.reshape(size)


def sample_graph(params: ModelParams, n: int, seed: SeedLike = None,
                 keep_latent: bool = False) -> SampledGraph:
    """Sample one graph on ``n`` nodes.

    Parameters
    ----------
    params : any parameter bundle from :mod:`sbm_ident.models`
    n : int
        Number of nodes, at least 2.
    seed : int or Generator
        Same seed, same graph.
    keep_latent : bool
        Retain the latent group vector in the result.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    ensure_valid(params)
    rng = np.random.default_rng(seed)

    z = rng.choice(params.Q, size=n, p=params.pi)
    iu, ju = np.triu_indices(n, 1)
    zi, zj = z[iu], z[ju]
    u = rng.random(len(iu))

    if isinstance(params, AffiliationParams):
        params = affiliation_to_block(params)

    if isinstance(params, BinaryBlockParams):
        edges = (u < params.P[zi, zj]).astype(np.int8)
        kind, kappa = "binary", 2
    elif isinstance(params, FiniteStateParams):
        cum = np.cumsum(params.Pvec, axis=2)[zi, zj]
        edges = (u[:, None] >= cum[:, :-1]).sum(axis=1).astype(np.int16)
        kind, kappa = "finite", params.kappa
    elif isinstance(params, WeightedParams):
        present = u < params.sparsity[zi, zj]
        edges = np.zeros(len(iu), dtype=np.int64)
        thetas = params.theta[zi, zj]
        for theta in np.unique(thetas[present]):
            sel = present & (thetas == theta)
            edges[sel] = sample_truncated_poisson(theta, rng, size=int(sel.sum()))
        kind, kappa = "weighted", None
    else:
        raise TypeError(f"unsupported parameter type {type(params).__name__}")

    return SampledGraph(n, kind, edges, z if keep_latent else None, kappa)
