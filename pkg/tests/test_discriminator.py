import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadkit.discriminator import assign_pseudo_labels, graph_similarity_scores, quantile
from gadkit.errors import EmptyVectorError, TooFewGraphsError

RNG = np.random.default_rng(31)


def brute_force_eta(z):
    m = len(z)
    out = np.zeros(m)
    for i in range(m):
        total = 0.0
        for j in range(m):
            if i == j:
                continue
            ni = max(np.linalg.norm(z[i]), 1e-8)
            nj = max(np.linalg.norm(z[j]), 1e-8)
            total += float(z[i] @ z[j]) / (ni * nj)
        out[i] = total / (m - 1)
    return out


def test_eta_identical_rows_all_ones():
    z = np.repeat([[1.0, 2.0, 3.0]], 5, axis=0)
    np.testing.assert_allclose(graph_similarity_scores(z), 1.0)


def test_eta_two_orthogonal_rows():
    z = np.array([[1.0, 0.0], [0.0, 2.0]])
    np.testing.assert_allclose(graph_similarity_scores(z), [0.0, 0.0])


def test_eta_matches_brute_force():
    z = RNG.normal(size=(5, 3))
    np.testing.assert_allclose(
        graph_similarity_scores(z), brute_force_eta(z), atol=1e-12
    )


def test_eta_invariant_to_row_rescaling():
    z = RNG.normal(size=(6, 4))
    scales = RNG.uniform(0.1, 5.0, size=(6, 1))
    np.testing.assert_allclose(
        graph_similarity_scores(z), graph_similarity_scores(z * scales), atol=1e-10
    )


def test_eta_needs_two_graphs():
    with pytest.raises(TooFewGraphsError):
        graph_similarity_scores(np.ones((1, 3)))


def test_quantile_endpoints():
    assert quantile([1.0, 2.0, 3.0, 4.0], 0.0) == 1.0
    assert quantile([1.0, 2.0, 3.0, 4.0], 1.0) == 4.0


def test_quantile_median_interpolates():
    assert quantile([1.0, 2.0, 3.0, 4.0], 0.5) == 2.5


def test_quantile_empty_vector():
    with pytest.raises(EmptyVectorError):
        quantile([], 0.5)


def oracle_quantile(values, q):
    s = sorted(values)
    pos = q * (len(s) - 1)
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


def test_quantile_matches_sort_interpolation_oracle():
    for _ in range(1000):
        n = int(RNG.integers(1, 30))
        values = RNG.normal(size=n)
        q = float(RNG.random())
        assert quantile(values, q) == pytest.approx(
            oracle_quantile(values, q), abs=1e-12
        )


def test_pseudo_labels_alpha_zero_flags_nothing():
    labels = assign_pseudo_labels(RNG.normal(size=20), alpha=0.0)
    assert labels.flagged_count() == 0


def test_pseudo_labels_flags_lowest_half():
    p = assign_pseudo_labels(np.array([0.1, 0.9, 0.8, 0.2]), alpha=0.5)
    np.testing.assert_array_equal(p.labels, [1, 0, 0, 1])


def test_pseudo_labels_all_equal_stay_normal():
    p = assign_pseudo_labels(np.full(7, 0.3), alpha=0.4)
    assert p.flagged_count() == 0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=40),
    st.floats(0.0, 1.0),
)
def test_pseudo_label_monotonicity_and_budget(values, alpha):
    eta = np.array(values)
    p = assign_pseudo_labels(eta, alpha)
    order = np.argsort(eta)
    flags = p.labels[order]
    # once labels switch to 0 along ascending eta they never switch back
    assert all(a >= b for a, b in zip(flags, flags[1:]))
    assert p.flagged_count() <= int(np.ceil(alpha * len(eta)))
