import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from grafield import (Graph, GraphDataError, VertexDistribution, build_graph,
                      empirical_network_pmf, empirical_vertex_pmf, quantile)

from suite import random_connected, toy_graph, triangle


def test_toy_degrees_and_volume():
    g = toy_graph()
    np.testing.assert_array_equal(g.degrees, [2, 8, 6, 6])
    assert g.volume == 22
    assert g.n == 4
    assert not g.is_sparse


def test_triangle_regular():
    g = triangle()
    np.testing.assert_array_equal(g.degrees, [2, 2, 2])
    assert g.volume == 6


def test_duplicate_edges_are_summed():
    g = build_graph([(1, 2, 1), (1, 2, 1)], 2)
    assert g.adjacency[0, 1] == 2
    assert g.volume == 4


def test_unweighted_pairs_default_to_one():
    g = build_graph([(1, 2), (2, 3)], 3)
    np.testing.assert_array_equal(g.degrees, [1, 2, 1])


@pytest.mark.parametrize("edges, n, msg", [
    ([(1, 5, 1)], 4, "bad vertex id"),
    ([(0, 1, 1)], 4, "bad vertex id"),
    ([(1, 1, 1), (1, 2, 1)], 2, "self-loop"),
    ([(1, 2, -1)], 2, "negative"),
    ([], 3, "empty graph"),
    ([(1, 2, 0)], 2, "empty graph"),
])
def test_build_graph_errors(edges, n, msg):
    with pytest.raises(GraphDataError, match=msg):
        build_graph(edges, n)


def test_self_loop_counts_once_when_allowed():
    g = build_graph([(1, 1, 2), (1, 2, 1)], 2, allow_self_loops=True)
    np.testing.assert_array_equal(g.degrees, [3, 1])


def test_large_graph_is_sparse():
    g = build_graph([(i, i + 1, 1) for i in range(1, 30)], 30, dense_threshold=10)
    assert g.is_sparse
    np.testing.assert_array_equal(g.degrees[[0, 1, -1]], [1, 2, 1])


def test_from_adjacency_validation():
    with pytest.raises(GraphDataError, match="symmetric"):
        Graph.from_adjacency(np.array([[0, 1.0], [2.0, 0]]))
    with pytest.raises(GraphDataError, match="negative"):
        Graph.from_adjacency(np.array([[0, -1.0], [-1.0, 0]]))
    g = Graph.from_adjacency(sp.csr_matrix(np.array([[0, 1.0], [1.0, 0]])))
    assert g.volume == 2 and not g.is_sparse


def test_graph_is_immutable():
    g = toy_graph()
    with pytest.raises(ValueError):
        g.degrees[0] = 5


def test_subgraph_keeps_labels():
    g = toy_graph()
    h = g.subgraph(np.array([False, True, True, True]))
    np.testing.assert_array_equal(h.vertex_order, [2, 3, 4])
    np.testing.assert_array_equal(h.degrees, [6, 6, 6])


def test_vertex_pmf_examples():
    np.testing.assert_allclose(empirical_vertex_pmf(toy_graph()).probs,
                               np.array([1, 4, 3, 3]) / 11, rtol=0, atol=1e-15)
    np.testing.assert_allclose(empirical_vertex_pmf(triangle()).probs, [1 / 3] * 3)
    star = build_graph([(1, 2), (1, 3), (1, 4)], 4)
    np.testing.assert_allclose(empirical_vertex_pmf(star).probs,
                               [1 / 2, 1 / 6, 1 / 6, 1 / 6])


def test_isolated_vertex_warns():
    g = build_graph([(1, 2, 1)], 3)
    with pytest.warns(UserWarning, match="zero"):
        p = empirical_vertex_pmf(g)
    assert p.probs[2] == 0
    np.testing.assert_array_equal(g.zero_degree_vertices(), [3])


def test_network_pmf():
    P = empirical_network_pmf(toy_graph())
    assert P.probs[0, 1] == pytest.approx(2 / 22, abs=1e-16)
    np.testing.assert_array_equal(P.probs, P.probs.T)
    assert P.probs.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(P.marginal(), empirical_vertex_pmf(toy_graph()).probs)


def test_quantile_examples():
    p = empirical_vertex_pmf(toy_graph())
    np.testing.assert_allclose(p.cdf, np.array([1, 5, 8, 11]) / 11)
    assert quantile(p, 0.05) == 1
    assert quantile(p, 0.5) == 3
    assert quantile(p, 1.0) == 4
    assert quantile(p, 1 / 11) == 1
    np.testing.assert_array_equal(quantile(p, [0.05, 0.2, 0.99]), [1, 2, 4])
    with pytest.raises(GraphDataError, match="out of range"):
        quantile(p, 0.0)


def test_quantile_skips_zero_mass_last_vertex():
    p = VertexDistribution([0.5, 0.5, 0.0])
    assert quantile(p, 1.0) == 2


def test_bad_pmf():
    with pytest.raises(GraphDataError):
        VertexDistribution([0.5, 0.6])
    with pytest.raises(GraphDataError):
        VertexDistribution([1.5, -0.5])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_pmf_properties(seed):
    g = random_connected(seed)
    p = empirical_vertex_pmf(g)
    P = empirical_network_pmf(g)
    assert abs(p.probs.sum() - 1) < 1e-12
    assert p.cdf[-1] == 1.0
    assert np.all(np.diff(p.cdf) >= 0)
    np.testing.assert_allclose(P.probs, P.probs.T, atol=0)
    np.testing.assert_allclose(P.marginal(), p.probs, atol=1e-15)
    u = np.random.default_rng(seed).uniform(1e-9, 1, size=20)
    x = quantile(p, u)
    assert np.all(p.cdf[x - 1] >= u)
    assert np.all(np.where(x > 1, p.cdf[np.maximum(x - 2, 0)], 0) < u)
