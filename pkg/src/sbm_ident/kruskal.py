"""Numerical checks of the algebraic identifiability conditions.

Covers Kruskal ranks and the three-way uniqueness condition
``I1 + I2 + I3 >= 2r + 2``, the matrix ``A`` of configuration probabilities
given latent node states on ``m`` nodes (whose full row rank is the base case
of the identifiability argument), the degree-sequence family used to exhibit
independent columns of ``A``, and the Erdos-Gallai realizability test.

"Generic" full-rank claims are probed at random parameters: a rank deficit at
a random draw points to a bug here, not to a counterexample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._linalg import RANK_RTOL, numerical_rank
from .errors import SizeGuardError
from .models import ModelParams, as_block, ensure_valid
from .oracle import conditional_rows, latent_assignments

MAX_KRUSKAL_ROWS = 20
MAX_A_ROWS = 4096
MAX_A_COLS = 2**20


def kruskal_rank(M: ArrayLike, rtol: float = RANK_RTOL) -> int:
    """Largest ``I`` such that every set of ``I`` rows of ``M`` is independent."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    rows = M.shape[0]
    if rows > MAX_KRUSKAL_ROWS:
        raise SizeGuardError("kruskal-rows", f"{rows} rows exceeds the {MAX_KRUSKAL_ROWS}-row guard")
    best = 0
    for size in range(1, rows + 1):
        if all(numerical_rank(M[list(idx)], rtol) == size
               for idx in itertools.combinations(range(rows), size)):
            best = size
        else:
            break
    return best


def kruskal_condition(I1: int, I2: int, I3: int, r: int) -> bool:
    return I1 + I2 + I3 >= 2 * r + 2


@dataclass(frozen=True)
class KruskalReport:
    ranks: tuple[int, int, int]
    r: int
    condition_met: bool


def kruskal_report(M1: ArrayLike, M2: ArrayLike, M3: ArrayLike) -> KruskalReport:
    """Kruskal ranks of three ``r``-row matrices and the uniqueness verdict."""
    mats = [np.atleast_2d(np.asarray(M, dtype=float)) for M in (M1, M2, M3)]
    r = mats[0].shape[0]
    if any(M.shape[0] != r for M in mats):
        raise ValueError("all three matrices need the same number of rows")
    ranks = tuple(kruskal_rank(M) for M in mats)
    return KruskalReport(ranks, r, kruskal_condition(*ranks, r))


def build_kruskal_tensor(v: ArrayLike, M1: ArrayLike, M2: ArrayLike, M3: ArrayLike) -> NDArray[np.float64]:
    """``sum_i v_i M1[i] (x) M2[i] (x) M3[i]``, shape ``(k1, k2, k3)``."""
    v = np.asarray(v, dtype=float)
    M1, M2, M3 = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (M1, M2, M3))
    if v.ndim != 1 or not (len(v) == M1.shape[0] == M2.shape[0] == M3.shape[0]):
        raise ValueError(f"dimension mismatch: v has {v.shape}, rows {M1.shape[0]}, {M2.shape[0]}, {M3.shape[0]}")
    return np.einsum("i,ia,ib,ic->abc", v, M1, M2, M3)


# -- the matrix A -------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalMatrix:
    """``matrix[I, x] = P(configuration x on K_m | node states I)``.

    Rows follow :func:`sbm_ident.oracle.latent_assignments`; columns the
    canonical configuration order.
    """

    matrix: NDArray[np.float64]
    Q: int
    kappa: int
    m: int

    @property
    def assignments(self) -> NDArray[np.int64]:
        return latent_assignments(self.Q, self.m)


def _guard_a(Q: int, kappa: int, m: int) -> None:
    fired, msgs = [], []
    if Q**m > MAX_A_ROWS:
        fired.append("rows")
        msgs.append(f"Q^m = {Q}^{m} = {Q**m} rows exceeds {MAX_A_ROWS}")
    E = m * (m - 1) // 2
    if kappa**E > MAX_A_COLS:
        fired.append("columns")
        msgs.append(f"kappa^(m choose 2) = {kappa}^{E} columns exceeds 2^20")
    if fired:
        raise SizeGuardError("+".join(fired), "; ".join(msgs))


def build_conditional_matrix(params: ModelParams, m: int) -> ConditionalMatrix:
    ensure_valid(params)
    block = as_block(params)
    _guard_a(block.Q, block.kappa, m)
    A = conditional_rows(block.state_probs(), latent_assignments(block.Q, m))
    return ConditionalMatrix(A, block.Q, block.kappa, m)


def node_bound(Q: int) -> float:
    """Smallest ``m`` the degree-sequence argument guarantees for ``Q`` groups."""
    if Q % 2 == 0:
        return Q - 1 + (Q + 2) ** 2 / 4
    return Q - 1 + (Q + 1) * (Q + 3) / 4


@dataclass(frozen=True)
class BaseCaseReport:
    rank: int
    rows: int
    columns: int
    full_row_rank: bool
    node_bound: float
    meets_bound: bool
    n_nodes_for_kruskal: int
    kruskal_arithmetic: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def check_base_case(params: ModelParams, m: int) -> BaseCaseReport:
    """Row rank of ``A`` on ``m`` nodes and the node-count bound.

    The report also spells out the rest of the argument, which is not
    constructed here: with full row rank on ``m`` nodes, three disjoint edge
    sets on ``m^2`` nodes give matrices of full row rank ``Q^(m^2)``, and
    ``3 Q^n >= 2 Q^n + 2`` satisfies the Kruskal condition.
    """
    cm = build_conditional_matrix(params, m)
    rows, cols = cm.matrix.shape
    rank = numerical_rank(cm.matrix)
    bound = node_bound(cm.Q)
    n = m * m
    note = (f"rank(A) = {rank} of {rows}; if full, disjoint edge sets on n = m^2 = {n} nodes "
            f"give Kruskal ranks Q^n each and 3 Q^n >= 2 Q^n + 2")
    return BaseCaseReport(rank, rows, cols, rank == rows, bound, m >= bound, n, note)


# -- degree sequences -------------------------------------------------------------

@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]
    realizable: bool


def erdos_gallai(d: Sequence[int]) -> bool:
    """True iff ``d`` is the degree sequence of a simple graph on ``len(d)`` nodes."""
    d = sorted((int(x) for x in d), reverse=True)
    m = len(d)
    if any(x < 0 for x in d) or sum(d) % 2:
        return False
    prefix = 0
    for k in range(1, m + 1):
        prefix += d[k - 1]
        rhs = k * (k - 1) + sum(min(k, x) for x in d[k:])
        if prefix > rhs:
            return False
    return True


def build_degree_family(Q: int, m: int) -> list[DegreeSequence]:
    """The ``Q^m`` degree sequences used to exhibit independent columns of ``A``.

    ``d_v`` ranges over ``1..Q`` for the first ``m - 1`` nodes; the last
    degree takes the ``Q`` values of the parity that makes the total even.
    """
    if m < 3:
        raise ValueError(f"m must be >= 3, got {m}")
    evens = tuple(range(0, 2 * Q - 1, 2))
    odds = tuple(range(1, 2 * Q, 2))
    out = []
    for head in itertools.product(range(1, Q + 1), repeat=m - 1):
        for last in (evens if sum(head) % 2 == 0 else odds):
            d = head + (last,)
            out.append(DegreeSequence(d, erdos_gallai(d)))
    return out
