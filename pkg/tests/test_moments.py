import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbm_ident import (
    MOTIFS,
    AffiliationParams,
    MomentSet,
    SampledGraph,
    empirical_moments,
    pool_moments,
    q1_statistic,
    theoretical_moments,
)
from sbm_ident.moments import MOMENT_NAMES

from reference import affiliation_block, motif_expectation, tuple_average

EDGE_COUNT = {k: len(v) for k, v in MOTIFS.items()}

prob = st.floats(0.0, 1.0)
uniform_params = st.builds(AffiliationParams.uniform, st.integers(1, 5), prob, prob)


def graph_from_adjacency(A):
    n = len(A)
    iu, ju = np.triu_indices(n, 1)
    return SampledGraph(n, "binary", np.asarray(A)[iu, ju].astype(np.int8))


def test_two_group_example():
    ms = theoretical_moments(AffiliationParams([0.3, 0.7], 0.8, 0.2))
    assert (ms.m1, ms.m2, ms.m31) == pytest.approx((0.548, 0.3124, 0.2096), abs=1e-15)


def test_uniform_example():
    ms = theoretical_moments(AffiliationParams.uniform(2, 0.8, 0.2))
    assert (ms.m1, ms.m31, ms.m41) == pytest.approx((0.5, 0.152, 0.0706), abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_erdos_renyi_moments_are_powers(p):
    ms = theoretical_moments(AffiliationParams([0.2, 0.3, 0.5], p, p))
    for k in MOMENT_NAMES:
        assert getattr(ms, k) == pytest.approx(p ** EDGE_COUNT[k], abs=1e-15)


@pytest.mark.parametrize("pi, alpha, beta", [
    ([0.3, 0.7], 0.8, 0.2),
    ([0.2, 0.3, 0.5], 0.35, 0.9),
])
def test_closed_forms_match_reference_enumeration(pi, alpha, beta):
    ms = theoretical_moments(AffiliationParams(pi, alpha, beta))
    P = affiliation_block(pi, alpha, beta)
    for k in MOMENT_NAMES:
        assert getattr(ms, k) == pytest.approx(motif_expectation(pi, P, 4, MOTIFS[k]), abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(uniform_params)
def test_uniform_prior_relations(params):
    ms = theoretical_moments(params)
    assert ms.m2 == pytest.approx(ms.m1**2, abs=1e-12)
    assert ms.m32 == pytest.approx(ms.m1**3, abs=1e-12)
    assert ms.m33 == pytest.approx(ms.m1**3, abs=1e-12)
    assert ms.m42 == pytest.approx(ms.m1 * ms.m31, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=4), prob, prob)
def test_moment_set_invariants(w, alpha, beta):
    pi = np.asarray(w) / np.sum(w)
    ms = theoretical_moments(AffiliationParams(pi, alpha, beta))
    assert ms.invariant_violations() == []


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), prob, prob)
def test_strict_fourth_moment_gap_when_separated(Q, alpha, beta):
    ms = theoretical_moments(AffiliationParams.uniform(Q, alpha, beta))
    gap = ms.m41 - ms.m1**4
    assert gap == pytest.approx((alpha - beta) ** 4 * (Q - 1) / Q**4, abs=1e-13)
    if abs(alpha - beta) > 0.05:
        assert gap > 0


def test_complete_and_empty_graphs():
    full = empirical_moments(graph_from_adjacency(np.ones((6, 6)) - np.eye(6)))
    empty = empirical_moments(graph_from_adjacency(np.zeros((6, 6))))
    assert all(getattr(full, k) == 1.0 for k in MOMENT_NAMES)
    assert all(getattr(empty, k) == 0.0 for k in MOMENT_NAMES)


def test_three_node_example():
    g = SampledGraph(3, "binary", np.array([1, 1, 0], dtype=np.int8))
    ms = empirical_moments(g, "K3")
    assert (ms.m1, ms.m2, ms.m31) == pytest.approx((2 / 3, 1 / 3, 0.0))
    assert ms.m41 is None


@pytest.mark.parametrize("seed", range(4))
def test_counts_match_tuple_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = 7
    U = rng.random((n, n)) < rng.uniform(0.3, 0.8)
    A = np.triu(U, 1)
    A = (A | A.T).astype(int)
    ms = empirical_moments(graph_from_adjacency(A))
    for k in MOMENT_NAMES:
        motif = [(a - 1, b - 1) for a, b in MOTIFS[k]]
        k_nodes = 2 if k == "m1" else 3 if k in ("m2", "m31") else 4
        assert getattr(ms, k) == pytest.approx(tuple_average(A, motif, k_nodes), abs=1e-12)


def test_small_or_non_binary_graphs_rejected():
    with pytest.raises(ValueError):
        empirical_moments(SampledGraph(3, "binary", np.array([1, 1, 0], dtype=np.int8)), "K4")
    with pytest.raises(ValueError):
        empirical_moments(SampledGraph(4, "weighted", np.arange(6)))


def test_q1_statistic():
    assert q1_statistic(theoretical_moments(AffiliationParams.uniform(2, 0.8, 0.2))) == \
        pytest.approx(0.027, abs=1e-15)
    assert q1_statistic(theoretical_moments(AffiliationParams([1.0], 0.37, 0.9))) == \
        pytest.approx(0.0, abs=1e-15)
    assert q1_statistic(theoretical_moments(AffiliationParams([0.2, 0.8], 0.6, 0.6))) == \
        pytest.approx(0.0, abs=1e-15)


def test_pooling_and_round_trip():
    a = MomentSet(m1=0.2, m2=0.1, m31=0.05, source="empirical")
    b = MomentSet(m1=0.4, m2=0.3, m31=0.15, source="empirical")
    pooled = pool_moments([a, b])
    assert (pooled.m1, pooled.m2, pooled.m31) == pytest.approx((0.3, 0.2, 0.1))
    assert pooled.m41 is None
    assert MomentSet.from_dict(a.as_dict()) == a
    assert MomentSet.from_dict({"m1": 0.5, "m2": 0.25, "m3": 0.152}).m31 == 0.152
    assert a.m3 == a.m31
    with pytest.raises(ValueError):
        a.require("m41")
