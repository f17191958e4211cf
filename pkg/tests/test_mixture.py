import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbm_ident import (
    FiniteStateParams,
    MixtureComponentSet,
    SampledGraph,
    WeightedParams,
    check_bin_independence,
    discretize,
    expand_k3_mixture,
    expand_kn_mixture,
    extract_power_sums_from_kn,
    power_sums,
    recover_affiliation_priors,
    recover_affiliation_weighted,
    recover_from_k3,
    recover_pi_newton,
)
from sbm_ident.errors import EstimationError, InvalidParamsError
from sbm_ident.mixture import (
    all_in_weight,
    edge_marginal,
    marginalize_to_edge,
    truncated_poisson_cdf,
    truncated_poisson_density,
)

from reference import random_pi, truncated_poisson_pmf

LN2 = math.log(2)


def sym(upper):
    U = np.asarray(upper, dtype=float)
    return np.triu(U) + np.triu(U, 1).T


def random_weighted(rng, Q):
    """Random parameters whose Q(Q+1)/2 thetas are pairwise at least 0.1 apart."""
    thetas = rng.permutation(np.arange(Q * (Q + 1) // 2)) * 0.4 + 0.5 + rng.uniform(0, 0.2)
    T = np.zeros((Q, Q))
    T[np.triu_indices(Q)] = thetas
    S = np.zeros((Q, Q))
    S[np.triu_indices(Q)] = rng.uniform(0.2, 1.0, len(thetas))
    return WeightedParams(random_pi(rng, Q), sym(S), sym(T))


def canonical(p: WeightedParams):
    order = np.argsort(np.diag(p.theta))
    ix = np.ix_(order, order)
    return p.pi[order], p.sparsity[ix], p.theta[ix]


def test_single_group_full_sparsity():
    mx = expand_k3_mixture(WeightedParams([1.0], [[1.0]], [[2.5]]))
    assert mx.components == ((1.0, (2.5, 2.5, 2.5)),)


def test_all_equal_weights_are_prior_cubes():
    mx = expand_k3_mixture(WeightedParams([0.3, 0.7], np.ones((2, 2)), [[1.0, 2.0], [2.0, 3.0]]))
    assert mx.weight_of((1.0, 1.0, 1.0)) == pytest.approx(0.027, abs=1e-15)
    assert mx.weight_of((3.0, 3.0, 3.0)) == pytest.approx(0.343, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_expansion_weights_sum_to_one(Q, seed):
    mx = expand_k3_mixture(random_weighted(np.random.default_rng(seed), Q))
    assert mx.total_weight() == pytest.approx(1.0, abs=1e-12)
    assert all(c.weight > 0 for c in mx.components)


def test_edge_marginal_agrees_with_projection():
    p = random_weighted(np.random.default_rng(0), 2)
    a, b = edge_marginal(p), marginalize_to_edge(expand_k3_mixture(p), 2)
    assert len(a.components) == len(b.components)
    for w, atoms in a.components:
        assert b.weight_of(atoms) == pytest.approx(w, abs=1e-15)


def test_recover_two_group_example():
    p = WeightedParams([0.3, 0.7], np.ones((2, 2)), [[1.0, 2.0], [2.0, 3.0]])
    r = recover_from_k3(expand_k3_mixture(p), edge_marginal(p))
    np.testing.assert_allclose(r.pi, [0.3, 0.7], atol=1e-12)
    np.testing.assert_allclose(r.sparsity, np.ones((2, 2)), atol=1e-12)
    np.testing.assert_allclose(r.theta, p.theta, atol=1e-12)


def test_recover_detects_repeated_theta():
    p = WeightedParams([0.3, 0.7], np.ones((2, 2)), [[1.0, 1.0], [1.0, 3.0]])
    with pytest.raises(EstimationError) as err:
        recover_from_k3(expand_k3_mixture(p), edge_marginal(p))
    assert err.value.code == "THETAS_NOT_DISTINCT"


def test_recover_single_group():
    p = WeightedParams([1.0], [[0.6]], [[2.0]])
    r = recover_from_k3(expand_k3_mixture(p), edge_marginal(p))
    assert r.pi.tolist() == [1.0]
    assert r.sparsity[0, 0] == pytest.approx(0.6, abs=1e-12)
    assert r.theta[0, 0] == 2.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_general_round_trip(Q, seed):
    p = random_weighted(np.random.default_rng(seed), Q)
    r = recover_from_k3(expand_k3_mixture(p), edge_marginal(p))
    for got, want in zip(canonical(r), canonical(p)):
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_recover_affiliation_example():
    p = WeightedParams.affiliation([0.4, 0.6], 0.9, 0.5, 1.0, 3.0)
    r = recover_affiliation_weighted(expand_k3_mixture(p))
    assert tuple(r) == pytest.approx((0.9, 0.5, 1.0, 3.0), abs=1e-12)


def test_recover_affiliation_dense_within_groups():
    p = WeightedParams.affiliation([0.4, 0.6], 1.0, 0.5, 1.0, 3.0)
    assert recover_affiliation_weighted(expand_k3_mixture(p)).alpha == pytest.approx(1.0, abs=1e-15)


def test_recover_affiliation_needs_distinct_thetas():
    p = WeightedParams.affiliation([0.4, 0.6], 0.9, 0.5, 2.0, 2.0)
    with pytest.raises(EstimationError):
        recover_affiliation_weighted(expand_k3_mixture(p))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_affiliation_round_trip_with_priors(Q, seed):
    rng = np.random.default_rng(seed)
    pi = random_pi(rng, Q)
    alpha, beta = rng.uniform(0.2, 1.0, 2)
    t_in, t_out = 0.5 + rng.permutation([0.0, 0.1 + rng.uniform(0, 2)])
    p = WeightedParams.affiliation(pi, alpha, beta, t_in, t_out)
    mixtures = {n: expand_kn_mixture(p, n) for n in range(2, max(Q, 3) + 1)}
    rec, got_pi = recover_affiliation_priors(mixtures, Q)
    assert tuple(rec) == pytest.approx((alpha, beta, t_in, t_out), abs=1e-8)
    np.testing.assert_allclose(got_pi, np.sort(pi), atol=1e-8)


def test_power_sums_from_all_in_weights():
    assert extract_power_sums_from_kn({2: 0.9 * 0.58}, 0.9)[2] == pytest.approx(0.58, abs=1e-15)
    assert extract_power_sums_from_kn([0.3, 0.2], 1.0).values.tolist() == [1.0, 0.3, 0.2]
    s = extract_power_sums_from_kn({2: 0.9 * 0.58, 3: 0.9**3 * 0.37}, 0.9)
    assert s[3] == pytest.approx(0.37, abs=1e-15)
    with pytest.raises(EstimationError):
        extract_power_sums_from_kn([0.3], 0.0)


def test_all_in_weight_from_expansion():
    p = WeightedParams.affiliation([0.3, 0.7], 0.9, 0.5, 1.0, 3.0)
    assert all_in_weight(expand_k3_mixture(p), 1.0) == pytest.approx(0.9**3 * 0.37, abs=1e-15)


def test_newton_examples():
    np.testing.assert_allclose(recover_pi_newton([1, 0.58], 2), [0.3, 0.7], atol=1e-12)
    np.testing.assert_allclose(recover_pi_newton(power_sums(np.full(3, 1 / 3), 3), 3),
                               np.full(3, 1 / 3), atol=1e-8)
    with pytest.raises(EstimationError):
        recover_pi_newton([1, 0.4], 2)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_newton_round_trip(Q, seed):
    pi = random_pi(np.random.default_rng(seed), Q)
    np.testing.assert_allclose(recover_pi_newton(power_sums(pi, Q), Q), np.sort(pi), atol=1e-8)


def test_truncated_poisson_density():
    assert truncated_poisson_density(1, LN2) == pytest.approx(LN2, abs=1e-15)
    assert truncated_poisson_density(2, LN2) == pytest.approx(LN2**2 / 2, abs=1e-15)
    with pytest.raises(ValueError):
        truncated_poisson_density(0, 1.0)
    for theta in (0.5, 2.0, 5.0):
        k = np.arange(1, 200)
        assert truncated_poisson_density(k, theta).sum() == pytest.approx(1.0, abs=1e-12)
        assert truncated_poisson_density(4, theta) == pytest.approx(truncated_poisson_pmf(4, theta), rel=1e-13)


def test_truncated_poisson_cdf_steps():
    assert truncated_poisson_cdf(0.99, 2.0) == 0.0
    assert truncated_poisson_cdf(1.0, LN2) == pytest.approx(LN2, abs=1e-15)
    assert truncated_poisson_cdf(1e6, 2.0) == pytest.approx(1.0)


def test_discretize_examples():
    p = 0.7
    one = discretize(WeightedParams([1.0], [[p]], [[2.0]]), [0.5])
    np.testing.assert_allclose(one.Pvec[0, 0], [1 - p, p], atol=1e-15)
    two = discretize(WeightedParams([1.0], [[1.0]], [[LN2]]), [0.5, 1.5])
    np.testing.assert_allclose(two.Pvec[0, 0], [0.0, LN2, 1 - LN2], atol=1e-15)


def test_discretize_rejects_unsorted_cutpoints():
    with pytest.raises(InvalidParamsError):
        discretize(WeightedParams([1.0], [[1.0]], [[1.0]]), [1.5, 0.5])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1),
       st.lists(st.floats(-1.0, 8.0), min_size=1, max_size=5, unique=True))
def test_discretize_preserves_mass(Q, seed, cuts):
    fsp = discretize(random_weighted(np.random.default_rng(seed), Q), sorted(cuts))
    np.testing.assert_allclose(fsp.Pvec.sum(axis=2), 1.0, atol=1e-12)
    assert fsp.kappa == len(cuts) + 1


def test_discretize_graph_uses_right_closed_bins():
    g = SampledGraph(3, "weighted", np.array([0, 1, 2]))
    binned = discretize(g, [0.0, 1.0])
    assert binned.kind == "finite" and binned.kappa == 3
    assert binned.edges.tolist() == [0, 1, 2]


def test_bin_independence_examples():
    V = np.array([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.2, 0.2, 0.6]])
    ok = FiniteStateParams([0.5, 0.5], [[V[0], V[1]], [V[1], V[2]]])
    assert check_bin_independence(ok).independent
    dup = FiniteStateParams([0.5, 0.5], [[V[0], V[0]], [V[0], V[2]]])
    assert not check_bin_independence(dup).independent
    few = FiniteStateParams([0.5, 0.5], [[V[0, :2] / V[0, :2].sum(), V[1, :2] / V[1, :2].sum()],
                                         [V[1, :2] / V[1, :2].sum(), V[2, :2] / V[2, :2].sum()]])
    rep = check_bin_independence(few)
    assert rep.rank <= 2 < rep.n_vectors and not rep.independent


def test_component_set_json_round_trip():
    mx = expand_k3_mixture(random_weighted(np.random.default_rng(2), 2))
    assert MixtureComponentSet.from_json(mx.to_json()) == mx
