import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grafield import (EventMatrix, GraphDataError, detect_changepoints,
                      kmeans_1d, phi2_graph, planted_event_matrix)
from grafield.changepoint import (label_boundaries, majority_smooth,
                                  phi2_weights, segment_impurity, within_ss)


def _lloyd_best(x, k, restarts, rng):
    """Best within-SS over random-restart Lloyd runs."""
    best = np.inf
    for _ in range(restarts):
        c = rng.choice(x, size=k, replace=False)
        for _ in range(100):
            lab = np.argmin(np.abs(x[:, None] - c[None, :]), axis=1)
            new = np.array([x[lab == j].mean() if np.any(lab == j) else c[j]
                            for j in range(k)])
            if np.allclose(new, c):
                break
            c = new
        best = min(best, within_ss(x, lab))
    return best


def test_phi2_examples():
    z = EventMatrix(np.array([[1, 1, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0],
                              [1, 1, 1, 0]]))
    W, _ = phi2_weights(z)
    assert W[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert W[0, 2] == 0.0
    assert W[3, 0] == pytest.approx(1 / 3, abs=1e-15)
    assert np.sqrt(W[3, 0]) == pytest.approx(2 / np.sqrt(12), abs=1e-15)
    np.testing.assert_array_equal(np.diag(W), 0)


def test_phi2_constant_row_warns():
    z = EventMatrix(np.array([[1, 1, 0, 0], [1, 1, 1, 1], [1, 1, 0, 1]]))
    with pytest.warns(UserWarning, match="constant rows \\[2\\]"):
        g = phi2_graph(z)
    np.testing.assert_array_equal(g.adjacency[1], 0)


def test_phi2_degenerate():
    z = EventMatrix(np.array([[1, 1, 0, 0], [1, 0, 1, 0]]))
    with pytest.raises(GraphDataError, match="degenerate association graph"):
        phi2_graph(z)


def test_event_matrix_validation():
    with pytest.raises(GraphDataError, match="row 2, column 3"):
        EventMatrix(np.array([[0, 1, 1], [1, 0, 2]]))
    with pytest.raises(GraphDataError):
        EventMatrix(np.array([1, 0, 1]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_phi2_symmetric_bounded_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    z = (rng.random((15, 12)) < 0.4).astype(int)
    z[:, 0] = 1
    z[:, 1] = 0
    W, _ = phi2_weights(EventMatrix(z))
    np.testing.assert_array_equal(W, W.T)
    assert W.min() >= 0 and W.max() <= 1
    W2, _ = phi2_weights(EventMatrix(z[:, rng.permutation(12)]))
    np.testing.assert_allclose(W2, W, atol=1e-14)


def test_kmeans_separated():
    lab = kmeans_1d([0, 0, 0, 10, 10, 10], 2)
    np.testing.assert_array_equal(lab, [0, 0, 0, 1, 1, 1])
    lab = kmeans_1d([10, 0, 10, 0], 2)
    np.testing.assert_array_equal(lab, [1, 0, 1, 0])


def test_kmeans_constant_values():
    np.testing.assert_array_equal(kmeans_1d(np.full(5, 3.0), 2), 0)


def test_kmeans_against_random_restarts():
    rng = np.random.default_rng(7)
    for trial in range(6):
        n = int(rng.integers(20, 201))
        k = int(rng.integers(2, 5))
        x = np.concatenate([rng.normal(rng.uniform(-5, 5), rng.uniform(0.2, 2), size=n // k + 1)
                            for _ in range(k)])[:n]
        dp = within_ss(x, kmeans_1d(x, k))
        assert dp <= _lloyd_best(x, k, 1000, rng) + 1e-9


def test_majority_smooth():
    lab = np.array([0, 0, 0, 1, 0, 0, 1, 1, 1, 1])
    np.testing.assert_array_equal(majority_smooth(lab, 5), [0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    np.testing.assert_array_equal(majority_smooth([0, 1], 5), [0, 1])


def test_boundaries_and_impurity():
    lab = [0, 0, 0, 1, 1]
    assert label_boundaries(lab) == [3]
    assert segment_impurity([0, 1, 0, 1, 1], [3]) == pytest.approx(1 / 5)


def test_planted_recovery():
    for seed in range(5):
        r = detect_changepoints(planted_event_matrix(seed=seed), m=15, k=2)
        assert len(r.boundaries) == 1
        assert 98 <= r.boundaries[0] <= 102
        assert not r.unstable
        assert r.labels.size == 200


def test_null_flagged_unstable():
    rng = np.random.default_rng(3)
    z = EventMatrix((rng.random((200, 20)) < 0.5).astype(int))
    r = detect_changepoints(z)
    assert r.unstable
    d = r.to_dict()
    assert d["unstable"] is True and d["compression_ratio"] == 13.33


def test_three_regimes():
    z = planted_event_matrix(300, 20, (100, 200), seed=3)
    r = detect_changepoints(z, m=15, k=3)
    assert len(r.boundaries) == 2
    assert abs(r.boundaries[0] - 100) <= 3 and abs(r.boundaries[1] - 200) <= 3


def test_planted_is_seeded():
    a = planted_event_matrix(seed=9).values
    b = planted_event_matrix(seed=9).values
    np.testing.assert_array_equal(a, b)
    assert a.shape == (200, 20)


def test_k_must_be_two_or_more():
    with pytest.raises(GraphDataError):
        detect_changepoints(planted_event_matrix(seed=0), k=1)
