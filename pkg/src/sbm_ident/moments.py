"""Motif moments of the binary affiliation model.

Nine expectations of edge products over at most four nodes describe the law
of ``K_4``. :func:`theoretical_moments` evaluates their closed forms as
polynomials in ``alpha``, ``beta`` and the prior power sums;
:func:`empirical_moments` averages the same edge products over every
embedding of the motif in one observed graph.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from math import comb
from typing import Optional

import numpy as np

from .models import AffiliationParams, power_sums
from .sampler import SampledGraph

MOMENT_NAMES = ("m1", "m2", "m31", "m32", "m33", "m41", "m42", "m5", "m6")

# 1-based edge sets; a motif's moment is E[prod X_e] over its edges
MOTIFS: dict[str, tuple[tuple[int, int], ...]] = {
    "m1": ((1, 2),),
    "m2": ((1, 2), (1, 3)),
    "m31": ((1, 2), (1, 3), (2, 3)),
    "m32": ((1, 2), (1, 3), (1, 4)),
    "m33": ((1, 2), (2, 3), (3, 4)),
    "m41": ((1, 2), (2, 3), (3, 4), (1, 4)),
    "m42": ((1, 2), (1, 3), (1, 4), (2, 3)),
    "m5": ((1, 2), (2, 3), (3, 4), (1, 4), (1, 3)),
    "m6": ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)),
}

K3_NAMES = ("m1", "m2", "m31")


@dataclass(frozen=True)
class MomentSet:
    """Motif moments; entries not computed are ``None``.

    ``source`` is ``"theoretical"``, ``"exact"`` (enumeration) or ``"empirical"``.
    """

    m1: Optional[float] = None
    m2: Optional[float] = None
    m31: Optional[float] = None
    m32: Optional[float] = None
    m33: Optional[float] = None
    m41: Optional[float] = None
    m42: Optional[float] = None
    m5: Optional[float] = None
    m6: Optional[float] = None
    source: str = "theoretical"

    @property
    def m3(self) -> Optional[float]:
        """Alias: the triangle moment is ``m31``."""
        return self.m31

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MomentSet":
        d = dict(d)
        if "m3" in d and "m31" not in d:
            d["m31"] = d.pop("m3")
        d.pop("m3", None)
        known = {k: (None if d.get(k) is None else float(d[k])) for k in MOMENT_NAMES}
        return cls(**known, source=d.get("source", "empirical"))

    def require(self, *names: str) -> tuple[float, ...]:
        missing = [k for k in names if getattr(self, k) is None]
        if missing:
            raise ValueError(f"moment set lacks {', '.join(missing)}")
        return tuple(float(getattr(self, k)) for k in names)

    def invariant_violations(self, tol: float = 1e-12) -> list[str]:
        """Check the range and Cauchy-Schwarz constraints any moment set obeys."""
        out = []
        for k in MOMENT_NAMES:
            v = getattr(self, k)
            if v is not None and not -tol <= v <= 1 + tol:
                out.append(f"{k}={v} outside [0, 1]")
        if self.m1 is not None and self.m2 is not None and self.m2 < self.m1**2 - tol:
            out.append("m2 < m1^2")
        if self.m2 is not None and self.m41 is not None and self.m41 < self.m2**2 - tol:
            out.append("m41 < m2^2")
        return out


def theoretical_moments(params: AffiliationParams) -> MomentSet:
    """Closed-form K4 motif moments of a binary affiliation model."""
    a, b = params.alpha, params.beta
    s = power_sums(params.pi, 4)
    s2, s3, s4 = s[2], s[3], s[4]
    s22 = s2 * s2

    m1 = s2 * a + (1 - s2) * b
    m2 = s3 * a**2 + 2 * a * b * (s2 - s3) + (1 - 2 * s2 + s3) * b**2
    m31 = s3 * a**3 + 3 * (s2 - s3) * a * b**2 + (1 - 3 * s2 + 2 * s3) * b**3
    m32 = (s4 * a**3 + 3 * (s3 - s4) * a**2 * b + 3 * (s2 - 2 * s3 + s4) * a * b**2
           + (1 - 3 * s2 + 3 * s3 - s4) * b**3)
    m33 = (s4 * a**3 + (s22 + 2 * s3 - 3 * s4) * a**2 * b
           + (3 * s2 - 2 * s22 - 4 * s3 + 3 * s4) * a * b**2
           + (1 - 3 * s2 + s22 + 2 * s3 - s4) * b**3)
    m41 = (s4 * a**4 + 2 * (s22 + 2 * s3 - 3 * s4) * a**2 * b**2
           + 4 * (s2 - s22 - 2 * s3 + 2 * s4) * a * b**3
           + (1 - 4 * s2 + 2 * s22 + 4 * s3 - 3 * s4) * b**4)
    m42 = (s4 * a**4 + (s3 - s4) * a**3 * b + (s22 + 2 * s3 - 3 * s4) * a**2 * b**2
           + (4 * s2 - 2 * s22 - 7 * s3 + 5 * s4) * a * b**3
           + (1 - 4 * s2 + s22 + 4 * s3 - 2 * s4) * b**4)
    m5 = (s4 * a**5 + 2 * (s3 - s4) * a**3 * b**2 + (2 * s3 - 4 * s4 + 2 * s22) * a**2 * b**3
          + (5 * s2 - 4 * s22 - 10 * s3 + 9 * s4) * a * b**4
          + (1 - 5 * s2 + 2 * s22 + 6 * s3 - 4 * s4) * b**5)
    m6 = (s4 * a**6 + 4 * (s3 - s4) * a**3 * b**3 + 3 * (s22 - s4) * a**2 * b**4
          + 6 * (s2 - s22 - 2 * s3 + 2 * s4) * a * b**5
          + (1 - 6 * s2 + 8 * s3 - 6 * s4 + 3 * s22) * b**6)
    return MomentSet(m1, m2, m31, m32, m33, m41, m42, m5, m6, source="theoretical")


def _k4_count(A: np.ndarray) -> float:
    """Number of 4-cliques: triangles among higher-indexed neighbours, per vertex."""
    total = 0.0
    n = A.shape[0]
    for u in range(n - 3):
        nb = np.flatnonzero(A[u, u + 1:]) + u + 1
        if len(nb) < 3:
            continue
        S = A[np.ix_(nb, nb)]
        total += np.sum(S * (S @ S)) / 6.0
    return total


def motif_counts(A: np.ndarray, upto: str = "K4") -> dict[str, float]:
    """Subgraph (not induced) counts of each motif in a 0/1 adjacency matrix.

    Counts are obtained from degree, common-neighbour and triangle
    statistics; the ``K4`` motif costs ``O(sum_u deg(u)^3)``.
    """
    A = np.asarray(A, dtype=float)
    d = A.sum(axis=1)
    A2 = A @ A
    t_v = np.sum(A2 * A, axis=1) / 2.0  # triangles through each vertex
    T = t_v.sum() / 3.0

    counts = {
        "m1": d.sum() / 2.0,
        "m2": np.sum(d * (d - 1) / 2.0),
        "m31": T,
    }
    if upto == "K3":
        return counts

    iu = np.triu_indices(A.shape[0], 1)
    c = A2[iu]                 # common neighbours of each unordered pair
    edge = A[iu] > 0
    c_choose_2 = c * (c - 1) / 2.0
    dm1 = d - 1
    counts.update({
        "m32": np.sum(d * (d - 1) * (d - 2) / 6.0),
        "m33": (dm1 @ A @ dm1) / 2.0 - 3.0 * T,
        "m41": np.sum(c_choose_2) / 2.0,
        "m42": np.sum(t_v * (d - 2)),
        "m5": np.sum(c_choose_2[edge]),
        "m6": _k4_count(A),
    })
    return counts


def embedding_counts(n: int) -> dict[str, int]:
    """Number of distinct placements of each motif in ``K_n``."""
    c3, c4 = comb(n, 3), comb(n, 4)
    return {
        "m1": comb(n, 2), "m2": 3 * c3, "m31": c3,
        "m32": 4 * c4, "m33": 12 * c4, "m41": 3 * c4,
        "m42": 12 * c4, "m5": 6 * c4, "m6": c4,
    }


def empirical_moments(g: SampledGraph, upto: str = "K4") -> MomentSet:
    """Average each motif's edge product over all its placements in ``g``.

    ``upto="K3"`` computes ``m1, m2, m31`` only (needs ``n >= 3``);
    ``upto="K4"`` computes all nine (needs ``n >= 4``).
    """
    if upto not in ("K3", "K4"):
        raise ValueError(f"upto must be 'K3' or 'K4', got {upto!r}")
    need = 3 if upto == "K3" else 4
    if g.n < need:
        raise ValueError(f"{upto} moments need n >= {need}, got n={g.n}")
    if g.kind != "binary" and not (g.kind == "finite" and g.kappa == 2):
        raise ValueError(f"empirical moments need a binary graph, got kind={g.kind}")

    counts = motif_counts(g.adjacency(), upto)
    totals = embedding_counts(g.n)
    values = {k: float(v) / totals[k] for k, v in counts.items()}
    return MomentSet(**values, source="empirical")


def pool_moments(sets: list[MomentSet]) -> MomentSet:
    """Average per-replicate moment sets (entries missing anywhere stay ``None``)."""
    pooled = {}
    for k in MOMENT_NAMES:
        vals = [getattr(s, k) for s in sets]
        pooled[k] = None if any(v is None for v in vals) else float(np.mean(vals))
    return MomentSet(**pooled, source="empirical")


def q1_statistic(ms: MomentSet) -> float:
    """``2 m1^3 - 3 m1 m2 + m31``; vanishes exactly when ``Q = 1`` or ``alpha = beta``."""
    m1, m2, m31 = ms.require("m1", "m2", "m31")
    return 2 * m1**3 - 3 * m1 * m2 + m31


def with_source(ms: MomentSet, source: str) -> MomentSet:
    return replace(ms, source=source)
