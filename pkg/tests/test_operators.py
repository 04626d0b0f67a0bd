import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings, strategies as st

from grafield import (ConvergenceError, GraphDataError, build_graph,
                      diffusion_map, engine_identities, laplacian,
                      laplacian_star, modularity, pagerank_matrix,
                      pagerank_scores, random_walk, reg_laplacian_type1,
                      reg_laplacian_type2, unified_spectral)
from grafield.operators import (diffusion_distance, diffusion_identity,
                                modularity_identity, type1_identity,
                                type2_gmatrix, type2_identity, walk_kernel)

from suite import random_connected, toy_graph


def _dense_pagerank(g, alpha):
    T = pagerank_matrix(g, alpha).matrix
    w, V = la.eig(T.T)
    v = np.real(V[:, np.argmax(np.real(w))])
    return v / v.sum()


def test_laplacian_toy():
    g = toy_graph()
    L = laplacian(g).matrix
    assert L[0, 1] == pytest.approx(0.5, abs=1e-15)
    sqd = np.sqrt(g.degrees)
    np.testing.assert_allclose(L @ sqd, sqd, atol=1e-14)
    w = la.eigvalsh(L)
    assert w[-1] == pytest.approx(1.0, abs=1e-14)
    assert laplacian(g).symmetric


def test_laplacian_star_spectrum():
    for seed in range(20):
        g = random_connected(seed)
        w = np.sort(la.eigvalsh(laplacian(g).matrix))
        ws = np.sort(la.eigvalsh(laplacian_star(g).matrix))
        w[-1] = 0.0
        np.testing.assert_allclose(ws, np.sort(w), atol=1e-10)


def test_modularity_toy():
    g = toy_graph()
    B = modularity(g).matrix
    assert B[0, 1] == pytest.approx(14 / 11, abs=1e-15)
    np.testing.assert_allclose(B @ np.ones(4), 0, atol=1e-14)
    assert modularity_identity(g) < 1e-9


def test_random_walk_rows():
    T = random_walk(toy_graph()).matrix
    np.testing.assert_allclose(T.sum(axis=1), 1, atol=1e-15)
    assert not random_walk(toy_graph()).symmetric


def test_isolated_vertex_rejected():
    g = build_graph([(1, 2, 1)], 3)
    with pytest.raises(GraphDataError, match="zero-degree"):
        laplacian(g)


def test_walk_kernel_toy():
    g = toy_graph()
    K = walk_kernel(g, 1)
    assert K[0, 1] == pytest.approx(2.75, abs=1e-14)
    emb = unified_spectral(g, "bpf")
    assert emb.kernel(1)[0, 1] == pytest.approx(2.75, abs=1e-12)
    np.testing.assert_allclose(walk_kernel(g, 2), emb.kernel(2), atol=1e-8)


def test_diffusion_map():
    g = toy_graph()
    dc = diffusion_map(g, t=2)
    np.testing.assert_allclose(dc.coords, dc.phi * dc.eigenvalues ** 2)
    for x in range(1, 5):
        assert diffusion_distance(dc, x, x) == 0
    assert diffusion_distance(dc, 3, 4) > 0
    assert diffusion_distance(dc, 1, 3) == pytest.approx(diffusion_distance(dc, 3, 1))


def test_diffusion_fractional_time_warns():
    with pytest.warns(UserWarning, match="non-integer"):
        diffusion_map(toy_graph(), t=0.5)


def test_diffusion_disconnected_warns():
    g = build_graph([(1, 2, 1), (3, 4, 1)], 4)
    with pytest.warns(UserWarning, match="components"):
        diffusion_map(g, t=1)


def test_type1_toy_and_limits():
    g = toy_graph()
    L1 = reg_laplacian_type1(g, 1.0).matrix
    assert L1[0, 1] == pytest.approx(2 / np.sqrt(27), abs=1e-15)
    np.testing.assert_array_equal(reg_laplacian_type1(g, 0).matrix, laplacian(g).matrix)
    np.testing.assert_allclose(reg_laplacian_type2(g, 0).matrix, laplacian(g).matrix,
                               atol=0)


def test_type2_top_pair():
    g = toy_graph()
    tau = 0.7
    L2 = reg_laplacian_type2(g, tau).matrix
    v = np.sqrt(g.degrees + tau)
    np.testing.assert_allclose(L2 @ v, v, atol=1e-14)
    assert la.eigvalsh(L2)[-1] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("tau", [0.5, 1.0, "minimax", "stein"])
def test_regularized_identities(tau):
    from grafield import resolve_tau
    for seed in range(10):
        g = random_connected(seed)
        t = resolve_tau(tau, g.n, g.volume, g.degrees).value
        assert type1_identity(g, t) <= 1e-12
        assert type2_identity(g, t) <= 1e-12
        w = np.sort(la.eigvalsh(reg_laplacian_type2(g, t).matrix))
        w[-1] = 0.0
        np.testing.assert_allclose(np.sort(la.eigvalsh(type2_gmatrix(g, t))), np.sort(w),
                                   atol=1e-10)


def test_pagerank_toy():
    g = toy_graph()
    pr = pagerank_scores(g, 0.15)
    np.testing.assert_allclose(pr.probs, _dense_pagerank(g, 0.15), atol=1e-10)
    assert abs(pr.probs.sum() - 1) <= 1e-12
    assert pr.kind == "pagerank"


def test_pagerank_limits():
    g = toy_graph()
    np.testing.assert_array_equal(pagerank_scores(g, 1.0).probs, 0.25)
    np.testing.assert_array_equal(pagerank_matrix(g, 1.0).matrix, 0.25)
    np.testing.assert_allclose(pagerank_scores(g, 0.0).probs, g.degrees / g.volume,
                               atol=1e-11)
    with pytest.raises(GraphDataError):
        pagerank_scores(g, 1.5)


def test_pagerank_dangling_vertex():
    g = build_graph([(1, 2, 1), (2, 3, 1), (1, 3, 1)], 4)
    pr = pagerank_scores(g, 0.15)
    np.testing.assert_allclose(pr.probs, _dense_pagerank(g, 0.15), atol=1e-10)
    np.testing.assert_allclose(pagerank_matrix(g, 0.15).matrix.sum(axis=1), 1, atol=1e-15)


def test_pagerank_convergence_error():
    g = build_graph([(1, 2, 1)], 2)
    with pytest.raises(ConvergenceError) as exc:
        pagerank_scores(g, 0.0, max_iter=5, tol=0.0)
    assert exc.value.iterations == 5


def test_engine_identities_report():
    dev = engine_identities(toy_graph())
    assert len(dev) == 8
    assert max(dev.values()) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([1, 2, 5]))
def test_diffusion_identity_random(seed, t):
    assert diffusion_identity(random_connected(seed), t) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.floats(0.01, 0.99))
def test_pagerank_random(seed, alpha):
    g = random_connected(seed)
    pr = pagerank_scores(g, alpha)
    np.testing.assert_allclose(pr.probs, _dense_pagerank(g, alpha), atol=1e-10)
