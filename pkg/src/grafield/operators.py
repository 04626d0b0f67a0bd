"""Classical spectral graph matrices and their links to the G-matrix engine.

The constructors return plain matrices wrapped in :class:`OperatorMatrix`;
the ``*_identity`` helpers measure how far each one is from the engine
output it should coincide with, so the equivalences can be checked on any
graph.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse.csgraph as csgraph

from .bases import bpf_basis, grafield_from_graph
from .engine import gmatrix_from, unified_spectral
from .errors import ConvergenceError, GraphDataError
from .graph import (Graph, VertexDistribution, empirical_network_pmf,
                    empirical_vertex_pmf)
from .smoothing import (_check_tau, laplace_smooth_network,
                        laplace_smooth_vertex, resolve_tau, smooth_transition)

SYMMETRIC_KINDS = ("laplacian", "laplacian-star", "modularity", "type1", "type2")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    kind: str
    matrix: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def symmetric(self) -> bool:
        return self.kind in SYMMETRIC_KINDS


@dataclass(frozen=True, eq=False)
class DiffusionCoordinates:
    """Diffusion map ``x -> (lambda_k^t phi_k(x))_k``."""

    t: float
    coords: np.ndarray
    eigenvalues: np.ndarray
    phi: np.ndarray
    method: str = "bpf-exact"


def _require_degrees(g: Graph):
    zero = g.zero_degree_vertices()
    if zero.size:
        raise GraphDataError(f"zero-degree vertices {zero.tolist()}")


def laplacian(g: Graph) -> OperatorMatrix:
    """``D^{-1/2} A D^{-1/2}``."""
    _require_degrees(g)
    s = 1.0 / np.sqrt(g.degrees)
    return OperatorMatrix("laplacian", g.dense() * np.outer(s, s))


def laplacian_star(g: Graph) -> OperatorMatrix:
    """Laplacian with the stationary direction ``sqrt(d / N)`` deflated."""
    L = laplacian(g).matrix
    u = np.sqrt(g.degrees / g.volume)
    return OperatorMatrix("laplacian-star", L - np.outer(u, u))


def modularity(g: Graph) -> OperatorMatrix:
    """``A - d d^T / N``."""
    if g.volume <= 0:
        raise GraphDataError("empty graph")
    d = g.degrees
    return OperatorMatrix("modularity", g.dense() - np.outer(d, d) / g.volume)


def random_walk(g: Graph) -> OperatorMatrix:
    """``D^{-1} A``."""
    _require_degrees(g)
    return OperatorMatrix("random-walk", g.dense() / g.degrees[:, None])


def _regularized_degrees(g, tau):
    _check_tau(tau)
    if math.isinf(tau):
        raise GraphDataError("regularized Laplacian needs a finite tau")
    dt = g.degrees + tau
    if (dt <= 0).any():
        raise GraphDataError("d_i + tau = 0 for some vertex")
    return dt


def reg_laplacian_type1(g: Graph, tau: float) -> OperatorMatrix:
    """``D_tau^{-1/2} A D_tau^{-1/2}`` with ``D_tau = diag(d + tau)``."""
    s = 1.0 / np.sqrt(_regularized_degrees(g, tau))
    return OperatorMatrix("type1", g.dense() * np.outer(s, s), {"tau": tau})


def reg_laplacian_type2(g: Graph, tau: float) -> OperatorMatrix:
    """``D_tau^{-1/2} A_tau D_tau^{-1/2}`` with ``A_tau = A + (tau/n) 11^T``."""
    s = 1.0 / np.sqrt(_regularized_degrees(g, tau))
    A_tau = g.dense() + tau / g.n
    return OperatorMatrix("type2", A_tau * np.outer(s, s), {"tau": tau})


def _walk_with_dangling(g):
    d = g.degrees
    T = np.empty((g.n, g.n))
    ok = d > 0
    T[ok] = g.dense()[ok] / d[ok, None]
    T[~ok] = 1.0 / g.n
    return T


def pagerank_matrix(g: Graph, alpha: float) -> OperatorMatrix:
    """Teleporting walk ``(1 - alpha) D^{-1} A + alpha / n``.

    ``alpha`` is the teleport mass. Rows of isolated vertices are uniform.
    """
    if not 0.0 <= alpha <= 1.0:
        raise GraphDataError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 1.0:
        return OperatorMatrix("pagerank", np.full((g.n, g.n), 1.0 / g.n),
                              {"alpha": alpha})
    T = (1.0 - alpha) * _walk_with_dangling(g) + alpha / g.n
    return OperatorMatrix("pagerank", T, {"alpha": alpha})


def pagerank_scores(g: Graph, alpha: float = 0.15, tol: float = 1e-12,
                    max_iter: int = 100_000) -> VertexDistribution:
    """Stationary distribution of the teleporting walk by power iteration.

    Iterates ``x <- x T_alpha`` without forming ``T_alpha`` until the L1
    change drops below ``tol``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise GraphDataError(f"alpha must lie in [0, 1], got {alpha}")
    n = g.n
    if alpha == 1.0:
        return VertexDistribution(np.full(n, 1.0 / n), kind="pagerank")
    d = g.degrees
    ok = d > 0
    inv = np.zeros(n)
    inv[ok] = 1.0 / d[ok]
    A = g.adjacency
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        walk = A.T @ (x * inv)
        walk = np.asarray(walk).ravel() + x[~ok].sum() / n
        new = (1.0 - alpha) * walk + alpha * x.sum() / n
        new /= new.sum()
        delta = np.abs(new - x).sum()
        x = new
        if delta < tol:
            return VertexDistribution(x / x.sum(), kind="pagerank")
    raise ConvergenceError(f"PageRank did not converge in {max_iter} "
                           f"iterations (last change {delta:.3g})", max_iter)


def _check_connected(g):
    ncomp, _ = csgraph.connected_components(g.adjacency, directed=False)
    if ncomp > 1:
        warnings.warn(f"graph has {ncomp} components; the stationary "
                      "distribution is not unique", stacklevel=3)


def diffusion_map(g: Graph, t: float = 1, k=None) -> DiffusionCoordinates:
    """Diffusion coordinates at time ``t`` from the block-pulse engine.

    ``k`` defaults to all ``n - 1`` non-trivial pairs. Non-integer ``t`` with
    negative eigenvalues uses ``sign(lambda) |lambda|^t`` and warns.
    """
    if t < 0:
        raise GraphDataError("diffusion time must be non-negative")
    _check_connected(g)
    emb = unified_spectral(g, "bpf", k=k)
    lam = emb.eigenvalues
    if float(t).is_integer():
        scale = lam ** int(t)
    else:
        if (lam < 0).any():
            warnings.warn("non-integer diffusion time with negative "
                          "eigenvalues: using sign(lambda) |lambda|^t",
                          stacklevel=2)
        scale = np.sign(lam) * np.abs(lam) ** t
    return DiffusionCoordinates(float(t), emb.coordinates * scale, lam,
                                emb.coordinates)


def diffusion_distance(dc: DiffusionCoordinates, x: int, y: int) -> float:
    """Euclidean distance between 1-based vertices ``x`` and ``y`` in diffusion space."""
    diff = dc.coords[x - 1] - dc.coords[y - 1]
    return float(np.sqrt(np.dot(diff, diff)))


def walk_kernel(g: Graph, t: int = 1) -> np.ndarray:
    """``N T^t D^{-1}``, the t-step transition probability over the stationary one."""
    T = np.linalg.matrix_power(random_walk(g).matrix, int(t))
    return g.volume * T / g.degrees[None, :]


# ---------------------------------------------------------------------------
# engine identities


def laplacian_identity(g: Graph) -> float:
    """Max deviation between the block-pulse G-matrix and the deflated Laplacian."""
    gm = gmatrix_from(empirical_network_pmf(g), bpf_basis(empirical_vertex_pmf(g)))
    return float(np.max(np.abs(gm.m_matrix - laplacian_star(g).matrix)))


def modularity_identity(g: Graph) -> float:
    """``max |B Theta - D Theta Lambda|`` for the characteristic-basis solution."""
    emb = unified_spectral(g, "characteristic", drop_trivial=False)
    Theta = emb.coefficients
    B = modularity(g).matrix
    D = g.degrees
    return float(np.max(np.abs(B @ Theta - (D[:, None] * Theta) * emb.eigenvalues)))


def diffusion_identity(g: Graph, t: int = 1) -> float:
    """Max deviation between ``N T^t D^{-1}`` and ``1 + sum lambda^t phi phi``."""
    emb = unified_spectral(g, "bpf")
    return float(np.max(np.abs(walk_kernel(g, t) - emb.kernel(t))))


def type1_gmatrix(g: Graph, tau: float) -> np.ndarray:
    """G-matrix of the empirical joint pmf against smoothed block pulses."""
    vdist = laplace_smooth_vertex(g.degrees, g.volume, tau)
    return gmatrix_from(empirical_network_pmf(g), bpf_basis(vdist)).m_matrix


def type1_identity(g: Graph, tau: float) -> float:
    """Deviation from ``((N + n tau)/N) L_tau^I - v v^T``, ``v = sqrt(p_tau)``."""
    n, N = g.n, g.volume
    v = np.sqrt((g.degrees + tau) / (N + n * tau))
    target = (N + n * tau) / N * reg_laplacian_type1(g, tau).matrix - np.outer(v, v)
    return float(np.max(np.abs(type1_gmatrix(g, tau) - target)))


def type2_gmatrix(g: Graph, tau: float) -> np.ndarray:
    vdist = laplace_smooth_vertex(g.degrees, g.volume, tau)
    return gmatrix_from(laplace_smooth_network(g, tau), bpf_basis(vdist)).m_matrix


def type2_identity(g: Graph, tau: float) -> float:
    """Deviation from ``L_tau^II - v v^T`` with ``v = sqrt((d + tau)/(N + n tau))``."""
    v = np.sqrt((g.degrees + tau) / (g.volume + g.n * tau))
    target = reg_laplacian_type2(g, tau).matrix - np.outer(v, v)
    return float(np.max(np.abs(type2_gmatrix(g, tau) - target)))


def transition_identity(g: Graph, tau: float) -> float:
    """Row-smoothed walk versus ``D_tau^{-1} A_tau``."""
    A_tau = g.dense() + tau / g.n
    target = A_tau / A_tau.sum(axis=1)[:, None]
    return float(np.max(np.abs(smooth_transition(g, tau) - target)))


def grafield_identity(g: Graph) -> float:
    """``T(x, y) / p(y)`` versus the GraField table."""
    T = random_walk(g).matrix
    return float(np.max(np.abs(T * (g.volume / g.degrees)[None, :]
                               - grafield_from_graph(g).dense())))


def pagerank_identity(g: Graph, alpha: float) -> float:
    """Power-iteration scores versus the dense left Perron vector."""
    T = pagerank_matrix(g, alpha).matrix
    w, V = la.eig(T.T)
    v = np.real(V[:, np.argmax(np.real(w))])
    v = v / v.sum()
    return float(np.max(np.abs(pagerank_scores(g, alpha).probs - v)))


def engine_identities(g: Graph, tau="minimax", t: int = 2,
                      alpha: float = 0.15) -> dict:
    """Every operator/engine equivalence as ``name -> max abs deviation``."""
    tau_val = resolve_tau(tau, g.n, g.volume, g.degrees).value
    if math.isinf(tau_val):
        tau_val = 1.0
    return {
        "laplacian~bpf": laplacian_identity(g),
        "modularity~characteristic": modularity_identity(g),
        "grafield~random-walk": grafield_identity(g),
        f"diffusion(t={t})~bpf": diffusion_identity(g, t),
        f"type1(tau={tau_val:.6g})~smoothed-bpf": type1_identity(g, tau_val),
        f"type2(tau={tau_val:.6g})~smoothed-bpf": type2_identity(g, tau_val),
        f"transition(tau={tau_val:.6g})~D_tau^-1 A_tau": transition_identity(g, tau_val),
        f"pagerank(alpha={alpha:g})~dense-eig": pagerank_identity(g, alpha),
    }
