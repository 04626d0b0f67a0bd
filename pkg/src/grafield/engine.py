"""G-matrix assembly and the generalized eigenproblem ``M Theta = S Theta Lambda``.

Projecting the centered GraField onto a basis gives the G-matrix

    M[j, k] = sum_{x,y} xi_j(x) xi_k(y) P(x, y) - (sum_x xi_j p)(sum_y xi_k p)

and its eigenvectors give the coefficients of approximate Karhunen-Loeve
coordinate functions ``phi_k = sum_j Theta[j, k] xi_j``. With block pulses
this is the normalized Laplacian, with indicators the modularity matrix,
and with LP polynomials a small ``m x m`` problem.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bases import (GraField, OrthonormalBasis, bpf_basis, char_basis,
                    lp_basis)
from .errors import GraphDataError
from .graph import (Graph, NetworkDistribution, VertexDistribution,
                    empirical_network_pmf, empirical_vertex_pmf)
from .smoothing import (TauChoice, laplace_smooth_network,
                        laplace_smooth_vertex, resolve_tau)

IDENTITY_TOL = 1e-12
ITERATIVE_TOL = 1e-8

DIAGONAL_KINDS = ("bpf", "characteristic")

BASIS_BUILDERS = {
    "bpf": bpf_basis,
    "characteristic": char_basis,
    "char": char_basis,
}


@dataclass(frozen=True, eq=False)
class GMatrix:
    """Basis-projected transform coefficients.

    ``raw`` holds ``V P V^T`` (dense, or sparse for large diagonal bases) and
    ``mean`` the basis means ``V p``; the centered matrix is
    ``raw - mean mean^T``. The centering is always applied.
    """

    raw: object
    mean: np.ndarray
    gram: object
    basis: OrthonormalBasis
    centered: bool = True

    @property
    def m(self) -> int:
        return self.raw.shape[0]

    @property
    def m_matrix(self) -> np.ndarray:
        raw = self.raw.toarray() if sp.issparse(self.raw) else self.raw
        return raw - np.outer(self.mean, self.mean)

    def matvec(self, x):
        return self.raw @ x - self.mean * (self.mean @ x)


@dataclass(frozen=True, eq=False)
class GraphEmbedding:
    """Approximate KL coordinates of a graph.

    Attributes
    ----------
    eigenvalues : ndarray, shape (k,)
        Signed eigenvalues. In the default ``"eigen"`` view they are
        non-increasing; in the ``"singular"`` view they are ordered by
        absolute value.
    coordinates : ndarray, shape (n, k)
        ``phi_k`` evaluated at every vertex.
    coefficients : ndarray, shape (m, k)
        ``Theta``, S-orthonormal.
    """

    eigenvalues: np.ndarray
    coordinates: np.ndarray
    coefficients: np.ndarray
    basis: OrthonormalBasis
    method: str
    view: str = "eigen"
    trivial_removed: bool = False

    @property
    def k(self) -> int:
        return self.eigenvalues.size

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    @property
    def singular_values(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    @property
    def compression_ratio(self) -> float:
        """Vertices per basis coefficient, ``n / m``."""
        return self.n / self.basis.m

    def kernel(self, t=1) -> np.ndarray:
        """``1 + sum_k lambda_k^t phi_k(x) phi_k(y)`` as an ``n x n`` array."""
        lam = _power(self.eigenvalues, t)
        Phi = self.coordinates
        return 1.0 + (Phi * lam) @ Phi.T


def _power(lam, t):
    if float(t).is_integer():
        return lam ** int(t)
    if (lam < 0).any():
        warnings.warn("non-integer power of negative eigenvalues uses "
                      "sign(lambda) |lambda|^t", stacklevel=3)
    return np.sign(lam) * np.abs(lam) ** t


def gmatrix_from(network: NetworkDistribution, basis: OrthonormalBasis) -> GMatrix:
    """G-matrix of a network pmf against a basis whose measure supplies the centering.

    This does not require the network marginals to equal the basis measure;
    that mixed case is how vertex-only (Type-I) smoothing enters.
    """
    if network.n != basis.n:
        raise GraphDataError("distribution mismatch: basis and network sizes "
                             f"differ ({basis.n} vs {network.n})")
    V = basis.values
    P = network.probs
    if basis.kind in DIAGONAL_KINDS and not sp.issparse(P):
        # block bases are diagonal: V P V^T is a two-sided row/column scaling
        v = np.diag(V) if not sp.issparse(V) else V.diagonal()
        raw = P * np.outer(v, v)
    elif sp.issparse(V):
        raw = V @ P @ V.T
        raw = sp.csr_matrix((raw + raw.T) / 2) if sp.issparse(raw) else (raw + raw.T) / 2
    else:
        PVt = P @ V.T
        raw = V @ np.asarray(PVt)
        raw = (raw + raw.T) / 2
    return GMatrix(raw, basis.means, basis.gram, basis)


def gmatrix(gf: GraField, basis: OrthonormalBasis) -> GMatrix:
    """G-matrix of a GraField with respect to a basis built on the same measure."""
    if basis.n != gf.n or not np.allclose(basis.measure.probs,
                                          gf.vertex_dist.probs,
                                          rtol=0, atol=1e-12):
        raise GraphDataError("distribution mismatch: basis measure differs "
                             "from the GraField vertex distribution")
    return gmatrix_from(gf.network_dist, basis)


def _gram_factor(S):
    """Lower factor ``L`` with ``S = L L^T``, as ('identity'|'diag'|'dense', data)."""
    if sp.issparse(S):
        off = S - sp.diags(S.diagonal())
        if off.nnz and abs(off).max() > 0:
            raise GraphDataError("sparse path supports diagonal Gram matrices only")
        diag = S.diagonal()
    else:
        S = np.asarray(S)
        if np.max(np.abs(S - np.eye(S.shape[0]))) <= IDENTITY_TOL:
            return "identity", None
        diag = np.diag(S).copy()
        if np.count_nonzero(S - np.diag(diag)):
            try:
                L = la.cholesky(S, lower=True)
            except la.LinAlgError:
                raise GraphDataError("degenerate Gram matrix") from None
            if np.min(np.abs(np.diag(L))) <= 1e-12 * np.max(np.abs(np.diag(L))):
                raise GraphDataError("degenerate Gram matrix")
            return "dense", L
    if (diag <= 0).any() or diag.min() <= 1e-14 * diag.max():
        raise GraphDataError("degenerate Gram matrix")
    if np.max(np.abs(diag - 1.0)) <= IDENTITY_TOL:
        return "identity", None
    return "diag", np.sqrt(diag)


def _sign_fix(Theta):
    idx = np.argmax(np.abs(Theta), axis=0)
    signs = np.sign(Theta[idx, np.arange(Theta.shape[1])])
    signs[signs == 0] = 1.0
    return Theta * signs


def _householder(y0):
    """Vector ``v`` of the reflector ``H = I - 2 v v^T / v^T v`` with ``H y0 = +-e_1``.

    Columns ``2..m`` of ``H`` span the orthogonal complement of ``y0``.
    """
    v = y0.copy()
    v[0] += np.copysign(1.0, y0[0])
    return v / np.linalg.norm(v)


def _reflect_both(C, v):
    """``H C H`` for ``H = I - 2 v v^T`` with unit ``v``, in O(m^2)."""
    Cv = C @ v
    a = float(v @ Cv)
    return C - 2.0 * np.outer(v, Cv) - 2.0 * np.outer(Cv, v) + 4.0 * a * np.outer(v, v)


def _order(w, view):
    key = -np.abs(w) if view == "singular" else -w
    return np.argsort(key, kind="stable")


def solve_generalized(gm: GMatrix, k: Optional[int] = None, *,
                      deflate: Optional[np.ndarray] = None,
                      view: str = "eigen", seed: int = 42):
    """Solve ``M Theta = S Theta Lambda`` by symmetric-definite reduction.

    ``S = L L^T`` is factored (a scaling for diagonal ``S``, skipped for the
    identity), ``L^{-1} M L^{-T}`` is solved as a standard symmetric problem
    and the eigenvectors are mapped back with ``L^{-T}``. Columns satisfy
    ``Theta^T S Theta = I``.

    Parameters
    ----------
    gm : GMatrix
    k : int, optional
        Number of leading eigenpairs (all by default; required when the
        G-matrix is sparse).
    deflate : ndarray, optional
        Coefficient vector of a direction to exclude; the problem is solved
        on its S-orthogonal complement.
    view : {"eigen", "singular"}
        Order by signed value or by magnitude.

    Returns
    -------
    theta : ndarray, shape (m, k)
    eigenvalues : ndarray, shape (k,)
    """
    if view not in ("eigen", "singular"):
        raise GraphDataError(f"unknown view {view!r}")
    m = gm.m
    kind, L = _gram_factor(gm.gram)
    avail = m - (deflate is not None)
    if k is None:
        k = avail
    if k < 1 or k > avail:
        raise GraphDataError(f"k={k} outside 1..{avail}")

    if kind == "identity":
        to_std = lambda x: x  # noqa: E731
        from_std = lambda y: y  # noqa: E731
    elif kind == "diag":
        to_std = lambda x: x * L if x.ndim == 1 else x * L[:, None]  # noqa: E731
        from_std = lambda y: y / L if y.ndim == 1 else y / L[:, None]  # noqa: E731
    else:
        to_std = lambda x: L.T @ x  # noqa: E731
        from_std = lambda y: la.solve_triangular(L.T, y, lower=False)  # noqa: E731

    y0 = None
    if deflate is not None:
        y0 = to_std(np.asarray(deflate, dtype=float))
        y0 = y0 / np.linalg.norm(y0)

    if sp.issparse(gm.raw):
        Y, w = _iterative(gm, kind, L, y0, k, view, seed)
    else:
        M = gm.m_matrix
        if kind == "identity":
            C = M
        elif kind == "diag":
            C = M / np.outer(L, L)
        else:
            C = la.solve_triangular(L, la.solve_triangular(L, M, lower=True).T,
                                    lower=True).T
        C = (C + C.T) / 2
        if y0 is not None:
            v = _householder(y0)
            w, Z = la.eigh(_reflect_both(C, v)[1:, 1:])
            Y = np.vstack([np.zeros((1, Z.shape[1])), Z])
            Y = Y - 2.0 * np.outer(v, v @ Y)
        else:
            w, Y = la.eigh(C)
        order = _order(w, view)[:k]
        w, Y = w[order], Y[:, order]
    Theta = _sign_fix(from_std(Y))
    return Theta, w


def _iterative(gm, kind, L, y0, k, view, seed):
    """Top-k eigenpairs of the reduced operator via implicitly restarted Lanczos."""
    if kind == "dense":
        raise GraphDataError("sparse path supports diagonal Gram matrices only")
    scale = np.ones(gm.m) if kind == "identity" else L

    def matvec(y):
        y = np.ravel(y)
        if y0 is not None:
            y = y - y0 * (y0 @ y)
        out = gm.matvec(y / scale) / scale
        if y0 is not None:
            out = out - y0 * (y0 @ out)
        return out

    op = spla.LinearOperator((gm.m, gm.m), matvec=matvec, dtype=float)
    rng = np.random.default_rng(seed)
    extra = 1 if y0 is not None else 0
    which = "LM" if view == "singular" else "LA"
    w, Y = spla.eigsh(op, k=min(k + extra, gm.m - 1), which=which,
                      tol=ITERATIVE_TOL, v0=rng.standard_normal(gm.m))
    if y0 is not None:
        # the deflated direction sits at eigenvalue 0; drop it
        drop = np.argmax(np.abs(y0 @ Y))
        keep = np.arange(w.size) != drop
        w, Y = w[keep], Y[:, keep]
    order = _order(w, view)[:k]
    return Y[:, order], w[order]


def constant_coefficients(gm: GMatrix):
    """Coefficients of the constant function if it lies in the basis span, else ``None``."""
    kind, L = _gram_factor(gm.gram)
    b = gm.mean
    if kind == "identity":
        c = b.copy()
    elif kind == "diag":
        c = b / L ** 2
    else:
        c = la.cho_solve((L, True), b)
    if float(b @ c) < 1.0 - 1e-9:
        return None
    return c


def _distributions(g: Graph, smoothing, regularization):
    if smoothing is None:
        return empirical_vertex_pmf(g), empirical_network_pmf(g)
    if not isinstance(smoothing, TauChoice):
        smoothing = resolve_tau(smoothing, g.n, g.volume, g.degrees)
    tau = smoothing.value
    vdist = laplace_smooth_vertex(g.degrees, g.volume, tau)
    if regularization == "type1":
        return vdist, empirical_network_pmf(g)
    if regularization == "type2":
        if math.isinf(tau):
            raise GraphDataError("type2 smoothing needs a finite tau")
        return vdist, laplace_smooth_network(g, tau)
    raise GraphDataError(f"unknown regularization {regularization!r}")


def unified_spectral(g: Graph, basis: str = "bpf", smoothing=None,
                     k: Optional[int] = None, *, regularization: str = "type2",
                     view: str = "eigen", drop_trivial: bool = True,
                     m: Optional[int] = None, seed: int = 42) -> GraphEmbedding:
    """Distributions, basis, G-matrix, eigensolve and expansion in one call.

    Parameters
    ----------
    g : Graph
    basis : {"bpf", "characteristic", "lp"}
    smoothing : TauChoice, str or float, optional
        Flattening constant for Laplace smoothing. ``regularization``
        selects whether only the vertex pmf is smoothed (``"type1"``) or the
        joint pmf as well (``"type2"``).
    k : int, optional
        Number of coordinate functions; all available by default.
    drop_trivial : bool
        Exclude the constant direction (eigenvalue 0 of the centered
        G-matrix) when it lies in the basis span.
    m : int, optional
        LP basis size (``basis="lp"`` only).
    """
    vdist, ndist = _distributions(g, smoothing, regularization)
    if basis == "lp":
        if m is None:
            raise GraphDataError("LP basis needs m")
        b = lp_basis(vdist, m)
        return _embed(ndist, b, k, view, drop_trivial, f"lp({m})", seed)

    if basis not in BASIS_BUILDERS:
        raise GraphDataError(f"unknown basis {basis!r}")
    support = vdist.support
    if not support.all():
        dropped = (np.flatnonzero(~support) + 1).tolist()
        warnings.warn(f"vertices {dropped} have zero mass and are left out "
                      "of the basis; their coordinates are set to 0",
                      stacklevel=2)
        sub_v = VertexDistribution(vdist.probs[support], kind=vdist.kind,
                                   tau=vdist.tau)
        P = ndist.probs
        P = P[support][:, support] if sp.issparse(P) else P[np.ix_(support, support)]
        sub_n = NetworkDistribution(P, kind=ndist.kind, tau=ndist.tau)
        emb = _embed(sub_n, BASIS_BUILDERS[basis](sub_v), k, view,
                     drop_trivial, f"{basis}-exact", seed)
        coords = np.zeros((g.n, emb.k))
        coords[support] = emb.coordinates
        return GraphEmbedding(emb.eigenvalues, coords, emb.coefficients,
                              emb.basis, emb.method, view, emb.trivial_removed)
    return _embed(ndist, BASIS_BUILDERS[basis](vdist), k, view, drop_trivial,
                  f"{'char' if basis.startswith('char') else basis}-exact", seed)


def _embed(ndist, basis, k, view, drop_trivial, method, seed):
    gm = gmatrix_from(ndist, basis)
    deflate = constant_coefficients(gm) if drop_trivial else None
    if sp.issparse(gm.raw) and k is None:
        raise GraphDataError("k is required for graphs on the sparse path")
    theta, w = solve_generalized(gm, k, deflate=deflate, view=view, seed=seed)
    coords = basis.expand(theta)
    return GraphEmbedding(w, coords, theta, basis, method, view,
                          deflate is not None)


def lp_spectral(g: Graph, m: int, k0: Optional[int] = None, *,
                view: str = "eigen") -> GraphEmbedding:
    """Compressed spectral embedding in an ``m``-term LP polynomial basis.

    Costs one product of the pmf with an ``n x m`` table plus an ``m x m``
    eigensolve. ``k0`` defaults to ``m``.
    """
    if k0 is None:
        k0 = m
    if k0 < 1 or k0 > m:
        raise GraphDataError(f"k0={k0} must lie in 1..m={m}")
    vdist = empirical_vertex_pmf(g)
    basis = lp_basis(vdist, m)
    return _embed(empirical_network_pmf(g), basis, k0, view, False,
                  f"lp({m})", 42)


def apply_kernel(gf: GraField, f) -> np.ndarray:
    """``(K f)(x) = sum_y (C(x, y) - 1) f(y) p(y)`` on the support; zero elsewhere."""
    p = gf.vertex_dist.probs
    f = np.asarray(f, dtype=float)
    Pf = np.asarray(gf.network_dist.probs @ f).ravel()
    out = Pf * gf.inv_probs - float(np.dot(f, p))
    out[~gf.support] = 0.0
    return out


def residual(gf: GraField, embedding: GraphEmbedding, k: int) -> np.ndarray:
    """Vertex-domain residual ``K phi_k - lambda_k phi_k`` (``k`` is 1-based)."""
    if not 1 <= k <= embedding.k:
        raise GraphDataError(f"k={k} outside 1..{embedding.k}")
    phi = embedding.coordinates[:, k - 1]
    r = apply_kernel(gf, phi) - embedding.eigenvalues[k - 1] * phi
    r[~gf.support] = 0.0
    return r


def residual_norm(gf: GraField, embedding: GraphEmbedding, k: int) -> float:
    """``L2[0, 1]`` norm of the integral-equation residual of pair ``k``."""
    r = residual(gf, embedding, k)
    return float(np.sqrt(np.dot(r * r, gf.vertex_dist.probs)))


def galerkin_projections(gf: GraField, embedding: GraphEmbedding, k: int) -> np.ndarray:
    """``<R_k, eta_l>`` for every basis function; zero for an exact Galerkin solve."""
    r = residual(gf, embedding, k)
    return np.asarray(embedding.basis.values @ (r * gf.vertex_dist.probs)).ravel()
