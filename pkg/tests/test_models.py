import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbm_ident import (
    AffiliationParams,
    BinaryBlockParams,
    FiniteStateParams,
    WeightedParams,
    affiliation_to_block,
    power_sums,
    validate,
)
from sbm_ident.errors import InvalidParamsError
from sbm_ident.models import ensure_valid

priors = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6).map(
    lambda w: np.asarray(w) / np.sum(w))
multi_priors = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6).map(
    lambda w: np.asarray(w) / np.sum(w))


def test_valid_affiliation_has_no_violations():
    assert validate(AffiliationParams([0.5, 0.5], 0.8, 0.2)) == []


def test_prior_sum_violation_is_reported():
    problems = validate(AffiliationParams([0.6, 0.6], 0.8, 0.2))
    assert any("pi sums to 1.2" in p for p in problems)


def test_asymmetric_connectivity_is_reported():
    problems = validate(BinaryBlockParams([0.5, 0.5], [[0.5, 0.3], [0.4, 0.5]]))
    assert any("symmetry" in p for p in problems)


@pytest.mark.parametrize("params, fragment", [
    (AffiliationParams([1.0], 1.2, 0.1), "alpha"),
    (BinaryBlockParams([0.5, 0.5], [[0.5, 1.3], [1.3, 0.5]]), "outside [0, 1]"),
    (FiniteStateParams([1.0], [[[0.5, 0.6]]]), "probability vectors"),
    (WeightedParams([1.0], [[0.0]], [[1.0]]), "sparsity"),
    (WeightedParams([1.0], [[0.5]], [[-1.0]]), "theta"),
    (AffiliationParams([0.0, 1.0], 0.5, 0.5), "strictly positive"),
])
def test_each_invariant_is_checked(params, fragment):
    assert any(fragment in p for p in validate(params))


def test_ensure_valid_raises():
    with pytest.raises(InvalidParamsError):
        ensure_valid(AffiliationParams([0.6, 0.6], 0.8, 0.2))


def test_parameter_arrays_are_read_only():
    p = BinaryBlockParams([0.5, 0.5], [[0.8, 0.2], [0.2, 0.8]])
    with pytest.raises(ValueError):
        p.P[0, 0] = 0.1


@pytest.mark.parametrize("pi, K, expected", [
    ([0.5, 0.5], 3, [1, 0.5, 0.25]),
    ([0.3, 0.7], 3, [1, 0.58, 0.37]),
    ([1.0], 4, [1, 1, 1, 1]),
])
def test_power_sums(pi, K, expected):
    s = power_sums(pi, K)
    np.testing.assert_allclose(s.values, expected, atol=1e-15)
    assert s[1] == pytest.approx(1.0)


def test_power_sums_rejects_nonpositive_order():
    with pytest.raises(ValueError):
        power_sums([1.0], 0)


def test_affiliation_to_block_examples():
    np.testing.assert_array_equal(
        affiliation_to_block(AffiliationParams.uniform(2, 0.8, 0.2)).P, [[0.8, 0.2], [0.2, 0.8]])
    np.testing.assert_array_equal(
        affiliation_to_block(AffiliationParams.uniform(3, 0.5, 0.5)).P, np.full((3, 3), 0.5))
    np.testing.assert_array_equal(affiliation_to_block(AffiliationParams([1.0], 0.4, 0.9)).P, [[0.4]])


@settings(max_examples=200, deadline=None)
@given(priors)
def test_power_sum_chain(pi):
    s = power_sums(pi, 4)
    assert s[2] ** 2 <= s[3] + 1e-15
    assert s[3] ** 2 <= s[2] * s[4] + 1e-15
    assert all(s[k + 1] <= s[k] + 1e-15 for k in range(1, 4))
    assert 0 < s[4] <= 1


@settings(max_examples=200, deadline=None)
@given(priors)
def test_cauchy_schwarz_equality_iff_uniform(pi):
    s = power_sums(pi, 3)
    uniform = np.ptp(pi) < 1e-9
    gap = s[3] - s[2] ** 2
    if uniform:
        assert abs(gap) < 1e-12
    else:
        assert gap > 0


@pytest.mark.parametrize("Q", [1, 2, 3, 5])
def test_uniform_priors_hit_equality(Q):
    s = power_sums(np.full(Q, 1 / Q), 3)
    assert s[3] == pytest.approx(s[2] ** 2, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(multi_priors)
def test_cubic_power_sum_combination_is_positive(pi):
    s = power_sums(pi, 3)
    assert 2 * s[2] ** 3 - 3 * s[2] * s[3] + s[3] > 0
