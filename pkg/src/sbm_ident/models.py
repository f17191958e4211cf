"""Parameter containers for the random graph mixture families.

Four families are covered: binary blockmodels with a free symmetric
connectivity matrix, the binary affiliation special case, finite-state
(``kappa`` colours per edge) blockmodels, and weighted parametric
blockmodels where an edge is absent with probability ``1 - p_ql`` and
otherwise carries a weight drawn from a parametric family.

Containers never raise on invariant violations; :func:`validate` reports
them and :func:`ensure_valid` turns a non-empty report into an exception.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidParamsError

PROB_TOL = 1e-12


class Family(str, enum.Enum):
    """Parametric families available for weighted edges.

    Only the zero-truncated Poisson is implemented. Gaussian and Laplace
    kernels would slot in here together with a density and a CDF in
    :mod:`sbm_ident.mixture`.
    """

    TRUNCATED_POISSON = "truncated-poisson"


def _as_vector(x: ArrayLike) -> NDArray[np.float64]:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    v.setflags(write=False)
    return v


def _as_frozen(x: ArrayLike, ndim: int) -> NDArray[np.float64]:
    a = np.asarray(x, dtype=float)
    if a.ndim != ndim:
        raise InvalidParamsError(f"expected a {ndim}-d array, got shape {a.shape}")
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BinaryBlockParams:
    """Binary stochastic blockmodel: ``P[q, l] = P(X_ij = 1 | Z_i=q, Z_j=l)``."""

    pi: NDArray[np.float64]
    P: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", _as_vector(self.pi))
        object.__setattr__(self, "P", _as_frozen(self.P, 2))

    @property
    def Q(self) -> int:
        return len(self.pi)

    @property
    def kappa(self) -> int:
        return 2

    def state_probs(self) -> NDArray[np.float64]:
        """Per-pair state distributions, shape ``(Q, Q, 2)`` with state 1 = edge."""
        return np.stack([1.0 - self.P, self.P], axis=-1)


@dataclass(frozen=True)
class AffiliationParams:
    """Binary affiliation model: ``alpha`` within groups, ``beta`` across."""

    pi: NDArray[np.float64]
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", _as_vector(self.pi))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def uniform(cls, Q: int, alpha: float, beta: float) -> "AffiliationParams":
        return cls(np.full(Q, 1.0 / Q), alpha, beta)

    @property
    def Q(self) -> int:
        return len(self.pi)

    @property
    def kappa(self) -> int:
        return 2


@dataclass(frozen=True)
class FiniteStateParams:
    """Blockmodel whose edges take one of ``kappa`` states (indexed ``0..kappa-1``).

    ``Pvec[q, l]`` is the probability vector of the edge state for a pair of
    nodes in groups ``q`` and ``l``.
    """

    pi: NDArray[np.float64]
    Pvec: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", _as_vector(self.pi))
        object.__setattr__(self, "Pvec", _as_frozen(self.Pvec, 3))

    @property
    def Q(self) -> int:
        return len(self.pi)

    @property
    def kappa(self) -> int:
        return self.Pvec.shape[2]

    def state_probs(self) -> NDArray[np.float64]:
        return self.Pvec


@dataclass(frozen=True)
class WeightedParams:
    """Weighted parametric blockmodel.

    The conditional law of an edge between groups ``q`` and ``l`` is
    ``(1 - sparsity[q, l]) * delta_0 + sparsity[q, l] * F(., theta[q, l])``.
    """

    pi: NDArray[np.float64]
    sparsity: NDArray[np.float64]
    theta: NDArray[np.float64]
    family: Family = Family.TRUNCATED_POISSON

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", _as_vector(self.pi))
        object.__setattr__(self, "sparsity", _as_frozen(self.sparsity, 2))
        object.__setattr__(self, "theta", _as_frozen(self.theta, 2))
        object.__setattr__(self, "family", Family(self.family))

    @classmethod
    def affiliation(cls, pi: ArrayLike, alpha: float, beta: float,
                    theta_in: float, theta_out: float,
                    family: Family = Family.TRUNCATED_POISSON) -> "WeightedParams":
        pi = _as_vector(pi)
        eye = np.eye(len(pi), dtype=bool)
        sparsity = np.where(eye, alpha, beta)
        theta = np.where(eye, theta_in, theta_out)
        return cls(pi, sparsity, theta, family)

    @property
    def Q(self) -> int:
        return len(self.pi)


ModelParams = Union[BinaryBlockParams, AffiliationParams, FiniteStateParams, WeightedParams]


@dataclass(frozen=True)
class PowerSums:
    """``values[k - 1] = s_k = sum_q pi_q ** k`` for ``k = 1..K``."""

    values: NDArray[np.float64] = field(repr=True)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_vector(self.values))

    def __getitem__(self, k: int) -> float:
        """Return ``s_k`` (1-based order)."""
        if k < 1 or k > len(self.values):
            raise IndexError(f"power sum order {k} outside 1..{len(self.values)}")
        return float(self.values[k - 1])

    def __len__(self) -> int:
        return len(self.values)


def power_sums(pi: ArrayLike, K: int) -> PowerSums:
    """Power sums ``s_1..s_K`` of a probability vector."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    pi = np.asarray(pi, dtype=float)
    orders = np.arange(1, K + 1)
    return PowerSums((pi[None, :] ** orders[:, None]).sum(axis=1))


def affiliation_to_block(a: AffiliationParams) -> BinaryBlockParams:
    eye = np.eye(a.Q, dtype=bool)
    return BinaryBlockParams(a.pi, np.where(eye, a.alpha, a.beta))


def _check_pi(pi: NDArray, out: list[str]) -> None:
    if pi.ndim != 1 or len(pi) < 1:
        out.append("pi must be a non-empty vector")
        return
    if not np.all(np.isfinite(pi)):
        out.append("pi has non-finite entries")
        return
    if np.any(pi <= 0):
        out.append("pi entries must be strictly positive")
    total = float(pi.sum())
    if abs(total - 1.0) > PROB_TOL:
        out.append(f"pi sums to {total:.12g}")


def _check_square(name: str, M: NDArray, Q: int, out: list[str]) -> bool:
    if M.shape[:2] != (Q, Q):
        out.append(f"{name} has shape {M.shape}, expected leading ({Q}, {Q})")
        return False
    if not np.all(np.isfinite(M)):
        out.append(f"{name} has non-finite entries")
        return False
    if not np.array_equal(M, np.swapaxes(M, 0, 1)):
        out.append(f"{name} violates symmetry")
    return True


def validate(params: ModelParams) -> list[str]:
    """List the violated invariants of ``params`` (empty means valid)."""
    out: list[str] = []
    _check_pi(params.pi, out)
    Q = len(params.pi)

    if isinstance(params, AffiliationParams):
        for name in ("alpha", "beta"):
            v = getattr(params, name)
            if not 0.0 <= v <= 1.0:
                out.append(f"{name}={v} outside [0, 1]")
    elif isinstance(params, BinaryBlockParams):
        if _check_square("P", params.P, Q, out):
            if np.any((params.P < 0) | (params.P > 1)):
                out.append("P entries outside [0, 1]")
    elif isinstance(params, FiniteStateParams):
        if _check_square("Pvec", params.Pvec, Q, out):
            if params.kappa < 2:
                out.append(f"kappa={params.kappa} must be >= 2")
            if np.any(params.Pvec < 0):
                out.append("Pvec has negative entries")
            sums = params.Pvec.sum(axis=2)
            if np.any(np.abs(sums - 1.0) > PROB_TOL):
                out.append("Pvec rows are not probability vectors")
    elif isinstance(params, WeightedParams):
        if _check_square("sparsity", params.sparsity, Q, out):
            if np.any((params.sparsity <= 0) | (params.sparsity > 1)):
                out.append("sparsity entries outside (0, 1]")
        if _check_square("theta", params.theta, Q, out):
            if params.family is Family.TRUNCATED_POISSON and np.any(params.theta <= 0):
                out.append("theta must be > 0 for the truncated Poisson family")
    else:
        out.append(f"unsupported parameter type {type(params).__name__}")
    return out


def ensure_valid(params: ModelParams) -> None:
    problems = validate(params)
    if problems:
        raise InvalidParamsError("; ".join(problems))


def as_block(params: ModelParams) -> BinaryBlockParams | FiniteStateParams:
    """Finite-state view of a binary or finite-state parameter bundle."""
    if isinstance(params, AffiliationParams):
        return affiliation_to_block(params)
    if isinstance(params, (BinaryBlockParams, FiniteStateParams)):
        return params
    raise TypeError(
        f"{type(params).__name__} has a continuous state space; discretize it first"
    )
