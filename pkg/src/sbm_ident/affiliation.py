"""Parameter recovery for the binary affiliation model from motif moments.

Estimators
----------
estimate_k3_q2
    Two groups, unknown priors: ``alpha`` is the unique real root of
    ``X^3 - 3 m1 X^2 + 3 m2 X - m31``; ``beta`` and the priors follow.
estimate_known_pi
    Known priors: rational formulas, or a cube-root formula when the priors
    are uniform.
estimate_q_uniform
    Uniform priors, unknown number of groups: ``Q`` from ``m1, m31, m41``.
candidates_general_q
    Any ``Q``: candidate ``(alpha, beta)`` pairs from the polynomials
    ``U_Q`` and ``V_Q`` built on ``K_{Q+1}`` edge-product expectations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from .errors import EstimationError
from .models import AffiliationParams, power_sums
from .moments import MomentSet, theoretical_moments
from .oracle import ExactDistribution, edge_list, edge_position, subset_expectations

DEGENERATE_TOL = 1e-8
UNIFORM_TOL = 1e-7
PI_UNIFORM_TOL = 1e-12
Q_INTEGER_TOL = 0.2
Q_DENOM_TOL = 1e-12

DEGENERATE = "DEGENERATE_ALPHA_BETA"
INCONSISTENT = "INCONSISTENT_MOMENTS"
INFEASIBLE_S2 = "INFEASIBLE_S2"
SINGLE_GROUP = "SINGLE_GROUP"


@dataclass
class RecoveryResult:
    alpha: float
    beta: float
    pi: Optional[NDArray[np.float64]] = None
    Q: Optional[int] = None
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "pi": None if self.pi is None else [float(p) for p in self.pi],
            "Q": self.Q,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


# -- cubic -------------------------------------------------------------------

def _cubic_u2(m1: float, m2: float, m31: float):
    return lambda x: ((x - 3 * m1) * x + 3 * m2) * x - m31


def real_cubic_roots(m1: float, m2: float, m31: float) -> list[float]:
    """Real roots of ``X^3 - 3 m1 X^2 + 3 m2 X - m31`` (Cardano).

    The substitution ``X = t + m1`` gives ``t^3 + p t + q`` with
    ``p = 3 (m2 - m1^2)`` and ``q = -(2 m1^3 - 3 m1 m2 + m31)``. When
    ``p >= 0`` the cubic is monotone and there is exactly one real root.
    """
    p = 3.0 * (m2 - m1 * m1)
    q = -(2 * m1**3 - 3 * m1 * m2 + m31)
    disc = (q / 2) ** 2 + (p / 3) ** 3
    if disc >= 0 or p >= 0:
        r = np.sqrt(max(disc, 0.0))
        t = float(np.cbrt(-q / 2 + r) + np.cbrt(-q / 2 - r))
        roots = [t + m1]
    else:
        # three real roots, trigonometric form
        rad = 2 * np.sqrt(-p / 3)
        phi = np.arccos(np.clip(3 * q / (p * rad), -1.0, 1.0)) / 3
        roots = sorted(float(rad * np.cos(phi - 2 * np.pi * k / 3) + m1) for k in range(3))

    f = _cubic_u2(m1, m2, m31)
    polished = []
    for x in roots:
        for _ in range(3):
            d = 3 * ((x - m1) ** 2 + (m2 - m1 * m1))
            if d == 0:
                break
            step = f(x) / d
            x -= step
            if abs(step) < 1e-17:
                break
        polished.append(x)
    return polished


def _bisection_root(m1: float, m2: float, m31: float) -> float:
    # U2(-1) <= -1 and U2(2) >= 1 for moments of 0/1 variables
    return brentq(_cubic_u2(m1, m2, m31), -1.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _beta_from_v2(alpha: float, m1: float, m2: float) -> float:
    return (3 * m1 * alpha - alpha**2 - 2 * m2) / (alpha - m1)


def _q2_fit(alpha: float, m1: float, m2: float, m31: float):
    """beta, s2, priors and the (m2, m31) residual for one cubic root."""
    if abs(alpha - m1) < DEGENERATE_TOL:
        raise EstimationError(DEGENERATE, "affiliation degenerate, beta and pi unidentifiable (alpha = beta)")
    beta = _beta_from_v2(alpha, m1, m2)
    if abs(alpha - beta) < DEGENERATE_TOL:
        raise EstimationError(DEGENERATE, "affiliation degenerate, beta and pi unidentifiable (alpha = beta)")
    s2 = (m1 - beta) / (alpha - beta)
    if s2 >= 1.0:
        raise EstimationError(INCONSISTENT, f"inconsistent moments: s2 = {s2:.6g} outside [1/2, 1)")
    if s2 < 0.5 - 1e-12:
        raise EstimationError(INFEASIBLE_S2, f"s2 = {s2:.6g} below 1/2: no real two-group priors")
    s2c = max(s2, 0.5)
    h = np.sqrt(2 * s2c - 1)
    pi = np.array([(1 - h) / 2, (1 + h) / 2])
    fit = theoretical_moments(AffiliationParams(pi, alpha, beta))
    residual = (fit.m2 - m2) ** 2 + (fit.m31 - m31) ** 2
    return beta, s2, pi, residual


def estimate_k3_q2(ms: MomentSet) -> RecoveryResult:
    """Two-group affiliation parameters from ``(m1, m2, m31)``.

    The unordered priors are returned in ascending order.

    Raises
    ------
    EstimationError
        ``DEGENERATE_ALPHA_BETA`` when ``alpha = beta``; ``INFEASIBLE_S2`` or
        ``INCONSISTENT_MOMENTS`` when the implied ``s2`` is outside ``[1/2, 1)``.
    """
    m1, m2, m31 = ms.require("m1", "m2", "m31")
    roots = real_cubic_roots(m1, m2, m31)
    diagnostics: dict = {"n_real_roots": len(roots), "monotone": m2 >= m1 * m1}

    if len(roots) == 1:
        alpha = roots[0]
        check = _bisection_root(m1, m2, m31)
        diagnostics["bisection_gap"] = abs(check - alpha)
        # near a multiple root bisection is only accurate to ~eps^(1/3), so it
        # overrides the closed form only when that one fails to be a root
        if abs(_cubic_u2(m1, m2, m31)(alpha)) > 1e-12:
            alpha = check
        beta, s2, pi, residual = _q2_fit(alpha, m1, m2, m31)
    else:
        # empirical moments with m2 < m1^2 can give three real roots: keep the
        # feasible one that best reproduces m2 and m31
        best, last_err = None, None
        for r in roots:
            try:
                fit = _q2_fit(r, m1, m2, m31)
            except EstimationError as err:
                last_err = err
                continue
            if best is None or fit[3] < best[1][3]:
                best = (r, fit)
        if best is None:
            raise last_err
        alpha, (beta, s2, pi, residual) = best

    diagnostics.update({"s2": s2, "residual_m2_m31": residual,
                        "in_unit_interval": bool(0 <= alpha <= 1 and 0 <= beta <= 1)})
    return RecoveryResult(alpha, beta, pi, 2, "k3-q2", diagnostics)


# -- known priors --------------------------------------------------------------

def _uniform_branch(m1: float, m31: float, Q: int) -> tuple[float, float]:
    if Q == 1:
        raise EstimationError(SINGLE_GROUP, "single group, beta undefined")
    beta = m1 + float(np.cbrt((m1**3 - m31) / (Q - 1)))
    alpha = Q * m1 + (1 - Q) * beta
    return alpha, beta


def estimate_known_pi(ms: MomentSet, pi: ArrayLike, tol: float = UNIFORM_TOL) -> RecoveryResult:
    """``alpha`` and ``beta`` from ``(m1, m2, m31)`` when the priors are known.

    ``tol`` is the threshold on ``|m2 - m1^2|`` separating the rational
    (non-uniform priors) branch from the cube-root (uniform) branch; pass a
    statistical threshold for empirical moments.
    """
    m1, m2, m31 = ms.require("m1", "m2", "m31")
    pi = np.asarray(pi, dtype=float)
    Q = len(pi)
    s = power_sums(pi, 3)
    s2, s3 = s[2], s[3]
    pi_uniform = abs(s3 - s2 * s2) <= PI_UNIFORM_TOL
    gap = m2 - m1 * m1
    diagnostics: dict = {"m2_minus_m1_sq": gap, "pi_uniform": bool(pi_uniform)}

    if abs(gap) > tol:
        if pi_uniform:
            raise EstimationError(INCONSISTENT, "priors are uniform but m2 != m1^2")
        num = (s3 - s2 * s3) * m1**3 + (s2**3 - s3) * m2 * m1 + (s3 * s2 - s2**3) * m31
        den = (m1 * m1 - m2) * (2 * s2**3 - 3 * s3 * s2 + s3)
        beta = num / den
        alpha = (m1 + (s2 - 1) * beta) / s2
        method = "known-pi-rational"
    else:
        alpha, beta = _uniform_branch(m1, m31, Q)
        method = "known-pi-uniform"
        if not pi_uniform:
            # m2 = m1^2 with non-uniform priors forces alpha = beta
            diagnostics["inconsistent"] = True
    fit = theoretical_moments(AffiliationParams(pi, alpha, beta))
    diagnostics["residuals"] = {"m1": fit.m1 - m1, "m2": fit.m2 - m2, "m31": fit.m31 - m31}
    return RecoveryResult(alpha, beta, pi.copy(), Q, method, diagnostics)


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(repr(float(x)))


def q_raw(m1: float, m31: float, m41: float) -> float:
    """Unrounded group count for uniform priors from ``m1, m31, m41``.

    The degree-12 rational function in the three moments factors as
    ``1 + (m31 - m1^3)^4 / (m41 - m1^4)^3``. Both differences cancel
    heavily when ``alpha`` is near ``beta``, so the expression is evaluated
    exactly on the shortest decimal form of each input and rounded once.
    """
    m1, m31, m41 = (_as_fraction(x) for x in (m1, m31, m41))
    a = m31 - m1**3
    b = m41 - m1**4
    return float(1 + a**4 / b**3)


def estimate_q_uniform(ms: MomentSet) -> RecoveryResult:
    """Number of groups, then ``alpha`` and ``beta``, assuming uniform priors."""
    m1, m31, m41 = ms.require("m1", "m31", "m41")
    if abs(m1**4 - m41) <= Q_DENOM_TOL:
        raise EstimationError(DEGENERATE, "alpha = beta: Q unidentifiable (m41 = m1^4)")
    raw = q_raw(m1, m31, m41)
    Q = int(round(raw))
    if abs(raw - Q) > Q_INTEGER_TOL or Q < 1:
        raise EstimationError(INCONSISTENT, f"moments inconsistent with uniform-prior affiliation model (Q_raw = {raw:.6g})")
    alpha, beta = _uniform_branch(m1, m31, Q)
    return RecoveryResult(alpha, beta, np.full(Q, 1.0 / Q), Q, "uniform-q", {"Q_raw": raw})


# -- general Q: U_Q and V_Q --------------------------------------------------------

ExpectationSource = Union[ExactDistribution, NDArray[np.float64], Mapping[frozenset, float]]


@dataclass(frozen=True)
class PolynomialU:
    """Monic polynomial with a root at ``alpha``; coefficients in descending order."""

    coeffs: NDArray[np.float64]
    Q: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polyval(self.coeffs, x)


@dataclass(frozen=True)
class PolynomialV:
    """``V_Q(X, Y) = constant(X) + Y * slope(X)``; each part in descending order."""

    constant: NDArray[np.float64]
    slope: NDArray[np.float64]
    Q: int

    def __call__(self, x, y):
        return np.polyval(self.constant, x) + y * np.polyval(self.slope, x)


def _expectation_table(source: ExpectationSource, n: int) -> NDArray[np.float64]:
    """Expectations over all edge subsets of ``K_n``, indexed by bitmask."""
    E = n * (n - 1) // 2
    if isinstance(source, ExactDistribution):
        if source.n != n:
            raise ValueError(f"need the law of K_{n}, got K_{source.n}")
        return subset_expectations(source)
    if isinstance(source, Mapping):
        pos = edge_position(n)
        table = np.full(1 << E, np.nan)
        for key, val in source.items():
            mask = 0
            for a, b in key:
                mask |= 1 << pos[(min(a, b), max(a, b))]
            table[mask] = val
        missing = np.flatnonzero(np.isnan(table))
        if len(missing):
            raise ValueError(f"missing expectations for {len(missing)} edge subsets of K_{n}")
        return table
    table = np.asarray(source, dtype=float)
    if table.shape != (1 << E,):
        raise ValueError(f"expected {1 << E} subset expectations for K_{n}, got shape {table.shape}")
    if np.any(np.isnan(table)):
        raise ValueError("missing subset expectation (NaN)")
    return table


def _signed_expansion(table: NDArray, edge_masks: Sequence[int], extra: int = 0) -> NDArray:
    """``E[X_extra * prod_{e}(X - X_e)]`` over ``edge_masks`` as descending coefficients."""
    M = len(edge_masks)
    coeffs = np.zeros(M + 1)
    for r in range(M + 1):
        acc = 0.0
        for subset in itertools.combinations(edge_masks, r):
            mask = extra
            for bit in subset:
                mask |= bit
            acc += table[mask]
        coeffs[r] = (-1) ** r * acc
    return coeffs


def build_uq(source: ExpectationSource, Q: int) -> PolynomialU:
    """``U_Q(X) = E[prod_{e in K_{Q+1}} (X - X_e)]``.

    ``source`` supplies ``E[prod_{e in S} X_e]`` for every edge subset ``S``
    of ``K_{Q+1}``: an :class:`ExactDistribution` on ``Q + 1`` nodes, an
    array indexed by edge bitmask, or a mapping from frozensets of 1-based
    edges to values.
    """
    n = Q + 1
    table = _expectation_table(source, n)
    masks = [1 << k for k in range(n * (n - 1) // 2)]
    return PolynomialU(_signed_expansion(table, masks), Q)


def build_vq(source: ExpectationSource, Q: int) -> PolynomialV:
    """``V_Q(X, Y) = E[(X + (Q-1) Y - sum_i X_{i,Q+1}) prod_{i<j<=Q} (X - X_ij)]``."""
    n = Q + 1
    table = _expectation_table(source, n)
    pos = edge_position(n)
    inner = [1 << pos[e] for e in edge_list(Q)]
    w = _signed_expansion(table, inner)
    const = np.append(w, 0.0)  # X * E[W](X)
    for i in range(1, Q + 1):
        xw = _signed_expansion(table, inner, extra=1 << pos[(i, n)])
        const[1:] -= xw
    slope = (Q - 1) * w
    return PolynomialV(const, slope, Q)


@dataclass(frozen=True)
class Candidate:
    alpha: float
    beta: Optional[float]
    residual: float
    flagged: bool = False


def _residual(alpha: float, beta: float, m1: float, m2: float, m31: float) -> float:
    """Squared misfit of ``m31`` after refitting ``s2`` from ``m1`` and ``s3`` from ``m2``."""
    d = alpha - beta
    s2 = (m1 - beta) / d
    s3 = (m2 - 2 * s2 * alpha * beta - (1 - 2 * s2) * beta**2) / d**2
    fit_m31 = s3 * alpha**3 + 3 * (s2 - s3) * alpha * beta**2 + (1 - 3 * s2 + 2 * s3) * beta**3
    return float((fit_m31 - m31) ** 2)


def candidates_general_q(source: ExpectationSource, Q: int,
                         tol: float = 1e-9) -> list[Candidate]:
    """Candidate ``(alpha, beta)`` pairs from ``U_Q`` and ``V_Q``.

    Every real root of ``U_Q`` in ``[0, 1]`` is a candidate ``alpha``; ``beta``
    solves the linear equation ``V_Q(alpha, Y) = 0``. Candidates whose
    ``Y``-coefficient vanishes (``alpha = beta``) are kept with
    ``flagged=True`` and ``beta=None``. Sorted by residual.
    """
    if Q > 4:
        raise ValueError("Q <= 4 only: the expansion enumerates 2^(Q+1 choose 2) subsets")
    n = Q + 1
    table = _expectation_table(source, n)
    U = build_uq(table, Q)
    V = build_vq(table, Q)
    pos = edge_position(n)
    m1 = table[1 << pos[(1, 2)]]
    m2 = table[(1 << pos[(1, 2)]) | (1 << pos[(1, 3)])]
    m31 = table[(1 << pos[(1, 2)]) | (1 << pos[(1, 3)]) | (1 << pos[(2, 3)])]

    sizes = np.array([bin(mask).count("1") for mask in range(len(table))])
    if np.max(np.abs(table - m1**sizes)) <= 1e-12:
        # i.i.d. edges (alpha = beta): U_Q = (X - m1)^N, a root np.roots cannot
        # resolve, and beta is unidentifiable
        return [Candidate(float(m1), None, float("inf"), flagged=True)]

    dU = np.polyder(U.coeffs)
    alphas: list[float] = []
    for r in np.roots(U.coeffs):
        x = float(r.real)
        # clustered multiple roots come back from np.roots as near-real pairs
        if abs(r.imag) > 1e-6 and abs(np.polyval(U.coeffs, x)) > 1e-12:
            continue
        for _ in range(20):
            d = np.polyval(dU, x)
            if d == 0:
                break
            step = np.polyval(U.coeffs, x) / d
            x -= step
            if abs(step) < 1e-16:
                break
        if -1e-9 <= x <= 1 + 1e-9 and all(abs(x - a) > 1e-6 for a in alphas):
            alphas.append(min(max(x, 0.0), 1.0))

    out = []
    scale = max(1.0, float(np.max(np.abs(V.slope))))
    for a in alphas:
        slope = float(np.polyval(V.slope, a))
        if abs(slope) <= tol * scale or abs(a - m1) < tol:
            out.append(Candidate(a, None, float("inf"), flagged=True))
            continue
        b = -float(np.polyval(V.constant, a)) / slope
        if abs(a - b) < tol:
            out.append(Candidate(a, b, float("inf"), flagged=True))
            continue
        out.append(Candidate(a, b, _residual(a, b, m1, m2, m31)))
    out.sort(key=lambda c: (c.flagged, c.residual))
    return out
