"""Constructive parameter recovery for weighted parametric blockmodels.

The law of the edges on ``n`` nodes is a finite mixture of product measures
whose factors are either the Dirac mass at 0 (absent edge) or ``F(., theta)``.
Given that mixture, exactly as a list of weighted components, the functions
here read the model parameters back off it. Fitting the components from data
(EM or otherwise) is not done here; a fitted component list can be passed in
directly.

Atoms are encoded as ``None`` for the Dirac mass at 0 and as the float
``theta`` for ``F(., theta)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats
from scipy.special import gammaln

from ._linalg import numerical_rank
from .errors import EstimationError, InvalidParamsError
from .models import Family, FiniteStateParams, PowerSums, WeightedParams, ensure_valid
from .sampler import SampledGraph

ATOM_TOL = 1e-9
NEWTON_ROOT_TOL = 1e-8

Atom = Optional[float]


class Component(NamedTuple):
    weight: float
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class MixtureComponentSet:
    """Unordered weighted product components over ``arity`` edge coordinates.

    For a set built on ``K_n`` the coordinates follow the canonical edge
    order; on ``K_3`` that is ``(X_12, X_13, X_23)``.
    """

    arity: int
    components: tuple[Component, ...]

    def __post_init__(self) -> None:
        comps = tuple(Component(float(w), tuple(None if a is None else float(a) for a in atoms))
                      for w, atoms in self.components)
        for c in comps:
            if len(c.atoms) != self.arity:
                raise ValueError(f"component {c} does not have arity {self.arity}")
        object.__setattr__(self, "components", comps)

    def total_weight(self) -> float:
        return float(sum(c.weight for c in self.components))

    def weight_of(self, atoms: Sequence[Atom], tol: float = ATOM_TOL) -> float:
        """Summed weight of the components whose atoms match ``atoms``."""
        return float(sum(c.weight for c in self.components if _same_atoms(c.atoms, atoms, tol)))

    def without_dirac(self) -> "MixtureComponentSet":
        return MixtureComponentSet(self.arity, tuple(c for c in self.components
                                                     if all(a is not None for a in c.atoms)))

    def merged(self, tol: float = ATOM_TOL) -> "MixtureComponentSet":
        """Combine components with matching atoms and drop zero weights."""
        out: list[list] = []
        for c in self.components:
            for slot in out:
                if _same_atoms(slot[1], c.atoms, tol):
                    slot[0] += c.weight
                    break
            else:
                out.append([c.weight, c.atoms])
        return MixtureComponentSet(self.arity, tuple(Component(w, a) for w, a in out if w > 0))

    def to_json(self) -> dict:
        return {"arity": self.arity,
                "components": [{"weight": c.weight, "atoms": list(c.atoms)} for c in self.components]}

    @classmethod
    def from_json(cls, d: dict) -> "MixtureComponentSet":
        return cls(int(d["arity"]), tuple(Component(c["weight"], tuple(c["atoms"])) for c in d["components"]))


def _same_atom(a: Atom, b: Atom, tol: float) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= tol


def _same_atoms(x: Sequence[Atom], y: Sequence[Atom], tol: float) -> bool:
    return len(x) == len(y) and all(_same_atom(a, b, tol) for a, b in zip(x, y))


# -- truncated Poisson ----------------------------------------------------------

def truncated_poisson_density(k, theta):
    """``theta^k / k! / (e^theta - 1)`` for integer ``k >= 1``."""
    k_arr = np.asarray(k)
    theta = float(theta)
    if theta <= 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if np.any(k_arr < 1) or np.any(k_arr != np.floor(k_arr)):
        raise ValueError("the zero-truncated Poisson is supported on k = 1, 2, ...")
    val = np.exp(k_arr * np.log(theta) - gammaln(k_arr + 1) - np.log(np.expm1(theta)))
    return float(val) if np.ndim(val) == 0 else val


def truncated_poisson_cdf(x, theta: float):
    """``P(K <= x)`` for the zero-truncated Poisson; 0 below 1."""
    x = np.asarray(x, dtype=float)
    p0 = np.exp(-theta)
    c = (stats.poisson.cdf(np.floor(x), theta) - p0) / -np.expm1(-theta)
    c = np.where(x < 1, 0.0, np.clip(c, 0.0, 1.0))
    return float(c) if np.ndim(c) == 0 else c


def _family_cdf(family: Family, x, theta: float):
    if family is Family.TRUNCATED_POISSON:
        return truncated_poisson_cdf(x, theta)
    raise NotImplementedError(f"no CDF for family {family}")


# -- forward expansion ------------------------------------------------------------

def expand_kn_mixture(params: WeightedParams, n: int) -> MixtureComponentSet:
    """Fully expanded mixture of the edge law on ``n`` nodes.

    Every latent assignment and every present/absent pattern yields one
    product component; components with identical atoms are merged and
    zero-weight ones dropped.
    """
    ensure_valid(params)
    Q = params.Q
    edges = list(itertools.combinations(range(n), 2))
    if Q**n * 2 ** len(edges) > 2**22:
        raise ValueError(f"expansion over Q={Q}, n={n} is too large")
    acc: dict[tuple, float] = {}
    for z in itertools.product(range(Q), repeat=n):
        wz = float(np.prod(params.pi[list(z)]))
        options = []
        for i, j in edges:
            p = float(params.sparsity[z[i], z[j]])
            options.append(((1.0 - p, None), (p, float(params.theta[z[i], z[j]]))))
        for choice in itertools.product(*options):
            w = wz
            for f, _ in choice:
                w *= f
            if w == 0.0:
                continue
            key = tuple(a for _, a in choice)
            acc[key] = acc.get(key, 0.0) + w
    return MixtureComponentSet(len(edges), tuple(Component(w, k) for k, w in acc.items()))


def expand_k3_mixture(params: WeightedParams) -> MixtureComponentSet:
    """Mixture law of ``(X_12, X_13, X_23)``."""
    return expand_kn_mixture(params, 3)


def edge_marginal(params: WeightedParams) -> MixtureComponentSet:
    """Mixture law of a single edge variable."""
    return expand_kn_mixture(params, 2)


def marginalize_to_edge(mixture: MixtureComponentSet, coordinate: int = 0) -> MixtureComponentSet:
    """Single-edge law obtained by keeping one coordinate of every component."""
    comps = tuple(Component(c.weight, (c.atoms[coordinate],)) for c in mixture.components)
    return MixtureComponentSet(1, comps).merged()


# -- recovery, general parametric model ------------------------------------------------

def _find_label(theta: float, diag: Sequence[float], tol: float) -> Optional[int]:
    hits = [q for q, t in enumerate(diag) if abs(t - theta) <= tol]
    return hits[0] if len(hits) == 1 else None


def recover_from_k3(components: MixtureComponentSet, marginal: MixtureComponentSet,
                    tol: float = ATOM_TOL) -> WeightedParams:
    """Recover ``pi``, ``sparsity`` and ``theta`` from the ``K_3`` mixture.

    Requires all ``theta_ql`` (``q <= l``) to be distinct. Groups are labelled
    by ascending ``theta_qq``.

    Steps: components with three equal atoms give ``theta_qq`` and
    ``pi_q p_qq`` (cube root of the weight); components with two equal atoms
    ``(theta_qq, theta_ql, theta_ql)`` divided by ``pi_q p_qq`` give
    ``pi_q pi_l p_ql^2`` and pair ``q`` with ``l``; the single-edge mixture
    gives ``pi_q pi_l p_ql`` (off-diagonal weights aggregate both orders and
    are halved); ratios give the sparsities and then the priors.
    """
    if components.arity != 3 or marginal.arity != 1:
        raise ValueError("need a K_3 mixture (arity 3) and a single-edge mixture (arity 1)")
    full = components.merged(tol).without_dirac()

    diag: list[tuple[float, float]] = []     # (theta_qq, pi_q p_qq)
    two_equal: list[tuple[float, float, float]] = []  # (singleton, repeated, weight)
    for w, (a, b, c) in full.components:
        ab, ac, bc = abs(a - b) <= tol, abs(a - c) <= tol, abs(b - c) <= tol
        if ab and ac and bc:
            diag.append((a, w ** (1 / 3)))
        elif ab:
            two_equal.append((c, a, w))
        elif ac:
            two_equal.append((b, a, w))
        elif bc:
            two_equal.append((a, b, w))
    if not diag:
        raise EstimationError("INCONSISTENT_MOMENTS", "no component with three equal atoms")
    diag.sort()
    thetas = [t for t, _ in diag]
    if any(abs(x - y) <= tol for x, y in zip(thetas, thetas[1:])):
        raise EstimationError("THETAS_NOT_DISTINCT", "thetas not distinct: repeated theta_qq")
    Q = len(diag)
    c = np.array([v for _, v in diag])   # pi_q p_qq

    # pi_q pi_l p_ql^2, gathered per off-diagonal theta and per diagonal label
    pairs: dict[int, dict] = {}
    off_thetas: list[float] = []
    for single, repeated, w in two_equal:
        q = _find_label(single, thetas, tol)
        if q is None:
            raise EstimationError("INCONSISTENT_MOMENTS", f"two-equal component with unknown singleton {single}")
        if _find_label(repeated, thetas, tol) is not None:
            raise EstimationError("THETAS_NOT_DISTINCT",
                                  "thetas not distinct: an off-diagonal theta equals a diagonal one")
        for k, t in enumerate(off_thetas):
            if abs(t - repeated) <= tol:
                break
        else:
            off_thetas.append(repeated)
            k = len(off_thetas) - 1
        pairs.setdefault(k, {}).setdefault(q, []).append(w / c[q])

    theta = np.zeros((Q, Q))
    sq = np.zeros((Q, Q))  # pi_q pi_l p_ql^2
    for q in range(Q):
        theta[q, q] = thetas[q]
        sq[q, q] = c[q] ** 2
    for k, by_label in pairs.items():
        if len(by_label) != 2:
            raise EstimationError("INCONSISTENT_MOMENTS",
                                  f"theta={off_thetas[k]} does not pair exactly two groups")
        (q, vq), (l, vl) = sorted(by_label.items())
        v = float(np.mean(vq + vl))
        if abs(float(np.mean(vq)) - float(np.mean(vl))) > 1e-6 * max(v, 1e-300):
            raise EstimationError("INCONSISTENT_MOMENTS", "unmatched two-equal components")
        theta[q, l] = theta[l, q] = off_thetas[k]
        sq[q, l] = sq[l, q] = v
    if len(pairs) != Q * (Q - 1) // 2:
        raise EstimationError("INCONSISTENT_MOMENTS",
                              f"found {len(pairs)} off-diagonal parameters, expected {Q * (Q - 1) // 2}")

    marg = marginal.merged(tol)
    lin = np.zeros((Q, Q))  # pi_q pi_l p_ql
    for q in range(Q):
        for l in range(q, Q):
            w = marg.weight_of((theta[q, l],), tol)
            if w <= 0:
                raise EstimationError("INCONSISTENT_MOMENTS", f"marginal lacks theta={theta[q, l]}")
            lin[q, l] = lin[l, q] = w if q == l else w / 2

    sparsity = sq / lin
    pi = c / np.diag(sparsity)
    if abs(pi.sum() - 1.0) > 1e-8:
        raise EstimationError("INCONSISTENT_MOMENTS", f"recovered priors sum to {pi.sum():.10g}")
    return WeightedParams(pi / pi.sum(), np.clip(sparsity, 0.0, 1.0), theta)


# -- recovery, affiliation model ---------------------------------------------------------

class AffiliationRecovery(NamedTuple):
    alpha: float
    beta: float
    theta_in: float
    theta_out: float


def recover_affiliation_weighted(mixture: MixtureComponentSet,
                                 tol: float = ATOM_TOL) -> AffiliationRecovery:
    """``alpha, beta, theta_in, theta_out`` from the full ``K_3`` mixture.

    Among the Dirac-free components, those with exactly two equal atoms are
    ``F_out (x) F_out (x) F_in`` up to order, which separates ``theta_in``
    from ``theta_out``. Then ``alpha`` is the weight of
    ``F_in (x) F_in (x) F_in`` over itself plus that of
    ``delta_0 (x) F_in (x) F_in``; ``beta`` likewise from
    ``F_out (x) F_out (x) F_in`` and ``delta_0 (x) F_out (x) F_in``.
    """
    if mixture.arity != 3:
        raise ValueError("need a K_3 mixture (arity 3)")
    full = mixture.merged(tol)
    theta_in = theta_out = None
    for _, (a, b, c) in full.without_dirac().components:
        ab, ac, bc = abs(a - b) <= tol, abs(a - c) <= tol, abs(b - c) <= tol
        if ab and ac:
            continue
        if ab or ac or bc:
            single = c if ab else (b if ac else a)
            repeated = a if (ab or ac) else b
            theta_in, theta_out = single, repeated
            break
    if theta_in is None:
        raise EstimationError("DEGENERATE_ALPHA_BETA",
                              "theta_in = theta_out (or beta = 0): in/out parameters unidentifiable")
    if abs(theta_in - theta_out) <= tol:
        raise EstimationError("DEGENERATE_ALPHA_BETA", "theta_in = theta_out: unidentifiable")

    w_in = full.weight_of((theta_in, theta_in, theta_in), tol)
    w_in0 = full.weight_of((None, theta_in, theta_in), tol)
    w_out = full.weight_of((theta_out, theta_out, theta_in), tol)
    w_out0 = full.weight_of((None, theta_out, theta_in), tol)
    if w_in <= 0:
        raise EstimationError("INCONSISTENT_MOMENTS", "no F_in x F_in x F_in component")
    alpha = w_in / (w_in + w_in0)
    beta = w_out / (w_out + w_out0)
    return AffiliationRecovery(alpha, beta, theta_in, theta_out)


def all_in_weight(mixture: MixtureComponentSet, theta_in: float, tol: float = ATOM_TOL) -> float:
    """Weight of the component with ``F(., theta_in)`` on every coordinate."""
    return mixture.weight_of((theta_in,) * mixture.arity, tol)


def extract_power_sums_from_kn(weights: Union[dict, Sequence[float]], alpha: float,
                               tol: float = 1e-12) -> PowerSums:
    """``s_n = w_n / alpha^(n choose 2)`` from the all-``theta_in`` weights.

    ``weights`` maps ``n`` to ``w_n`` (or lists ``w_2, w_3, ...``). The
    returned power sums start at ``s_1 = 1``.
    """
    if alpha <= tol:
        raise EstimationError("DEGENERATE_ALPHA_BETA", f"alpha={alpha} too small to divide by")
    if not isinstance(weights, dict):
        weights = {n: w for n, w in enumerate(weights, start=2)}
    top = max(weights) if weights else 1
    values = [1.0]
    for n in range(2, top + 1):
        if n not in weights:
            raise ValueError(f"missing all-in weight for n={n}")
        values.append(float(weights[n]) / alpha ** comb(n, 2))
    return PowerSums(values)


def _elementary_from_power_sums(p: Sequence[float]) -> list[float]:
    """Newton's identities: ``k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i``."""
    e = [1.0]
    for k in range(1, len(p) + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)) / k)
    return e


def _cluster_means(roots: NDArray[np.complex128], radius: float) -> NDArray[np.float64]:
    """Replace each group of roots closer than ``radius`` by its mean (single linkage)."""
    n = len(roots)
    label = list(range(n))
    for i in range(n):
        for j in range(i):
            if abs(roots[i] - roots[j]) < radius:
                old, new = label[i], label[j]
                label = [new if x == old else x for x in label]
    out = np.empty(n)
    for lab in set(label):
        members = [k for k in range(n) if label[k] == lab]
        out[members] = np.mean(roots[members]).real
    return out


def recover_pi_newton(power_sums: Union[PowerSums, Sequence[float]], Q: int,
                      tol: float = NEWTON_ROOT_TOL) -> NDArray[np.float64]:
    """Priors (ascending) from their power sums ``s_1..s_Q``.

    The elementary symmetric polynomials come from Newton's identities; the
    priors are the roots of ``x^Q - e_1 x^(Q-1) + e_2 x^(Q-2) - ...``.
    """
    s = power_sums.values if isinstance(power_sums, PowerSums) else np.asarray(power_sums, dtype=float)
    if len(s) < Q:
        raise ValueError(f"need power sums s_1..s_{Q}, got {len(s)}")
    s = np.asarray(s[:Q], dtype=float)
    e = _elementary_from_power_sums(s)
    coeffs = [(-1) ** k * e[k] for k in range(Q + 1)]
    roots = np.roots(coeffs).astype(complex)

    def misfit(x):
        return float(np.max(np.abs([np.sum(x ** k) - s[k - 1] for k in range(1, Q + 1)])))

    # repeated priors come back from np.roots as a small complex cluster of
    # radius ~ eps^(1/multiplicity); its mean is accurate
    versions = [roots.real.copy(), _cluster_means(roots, 4 * 1e-15 ** (1 / max(Q, 1)))]
    best = min(versions, key=misfit)
    if misfit(best) > tol or np.any(best < -tol):
        raise EstimationError("INFEASIBLE_S2", "power sums inconsistent with a probability vector")
    return np.sort(np.clip(best, 0.0, None))


def recover_affiliation_priors(mixtures: dict, Q: int,
                               tol: float = ATOM_TOL) -> tuple[AffiliationRecovery, NDArray[np.float64]]:
    """Affiliation parameters plus priors from the mixtures on ``K_2 .. K_Q``.

    ``mixtures`` maps ``n`` to the mixture on ``n`` nodes and must contain
    ``n = 3`` and every ``n`` from 2 to ``Q``. Only ``F_in`` on all edges
    forces all nodes into one group, so its weight on ``K_n`` is
    ``alpha^(n choose 2) s_n``.
    """
    if 3 not in mixtures:
        raise ValueError("the K_3 mixture is required")
    rec = recover_affiliation_weighted(mixtures[3], tol)
    weights = {n: all_in_weight(mixtures[n], rec.theta_in, tol) for n in range(2, Q + 1)}
    return rec, recover_pi_newton(extract_power_sums_from_kn(weights, rec.alpha), Q)


# -- binning ------------------------------------------------------------------------------

def _check_cutpoints(cutpoints: ArrayLike) -> NDArray[np.float64]:
    u = np.atleast_1d(np.asarray(cutpoints, dtype=float))
    if len(u) == 0 or np.any(np.diff(u) <= 0):
        raise InvalidParamsError("cutpoints must be a non-empty strictly ascending sequence")
    return u


def discretize(obj: Union[WeightedParams, SampledGraph], cutpoints: ArrayLike):
    """Bin edge values into ``kappa = len(cutpoints) + 1`` intervals.

    Interval ``k`` is ``(u_{k-1}, u_k]`` with ``u_0 = -inf`` and
    ``u_kappa = +inf``. A :class:`WeightedParams` becomes a
    :class:`FiniteStateParams` whose state probabilities are the interval
    masses (the Dirac mass at 0 lands in the interval containing 0); a
    weighted :class:`SampledGraph` becomes a finite-state graph.
    """
    u = _check_cutpoints(cutpoints)
    kappa = len(u) + 1
    if isinstance(obj, SampledGraph):
        if obj.kind != "weighted":
            raise ValueError("only weighted graphs can be binned")
        states = np.searchsorted(u, obj.edges, side="left").astype(np.int16)
        return SampledGraph(obj.n, "finite", states, obj.z, kappa)

    ensure_valid(obj)
    bounds = np.concatenate([[-np.inf], u, [np.inf]])
    zero_bin = int(np.searchsorted(u, 0.0, side="left"))
    Q = obj.Q
    Pvec = np.zeros((Q, Q, kappa))
    for q in range(Q):
        for l in range(Q):
            cdf = np.array([0.0 if b == -np.inf else 1.0 if b == np.inf
                            else _family_cdf(obj.family, b, obj.theta[q, l]) for b in bounds])
            p = obj.sparsity[q, l]
            Pvec[q, l] = p * np.diff(cdf)
            Pvec[q, l, zero_bin] += 1.0 - p
    return FiniteStateParams(obj.pi, Pvec)


@dataclass(frozen=True)
class BinIndependence:
    rank: int
    n_vectors: int
    independent: bool


def check_bin_independence(fsp: FiniteStateParams) -> BinIndependence:
    """Numerical rank of the ``Q(Q+1)/2`` state vectors ``p_ql`` (``q <= l``)."""
    Q = fsp.Q
    rows = np.array([fsp.Pvec[q, l] for q in range(Q) for l in range(q, Q)])
    r = numerical_rank(rows)
    return BinIndependence(r, len(rows), r == len(rows))
