"""The GraField kernel and the orthonormal trial bases projected onto it.

Every basis is stored by its vertex-domain values ``xi_j(x)``; the
quantile-domain function ``eta_j(u) = xi_j(Q(u))`` is a step function on the
cdf grid of the basis measure and is evaluated on demand.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import GraphDataError
from .graph import (DENSE_THRESHOLD, Graph, NetworkDistribution,
                    VertexDistribution, empirical_network_pmf,
                    empirical_vertex_pmf, quantile)

LP_RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GraField:
    """Normalized kernel ``C(x, y) = P(x, y) / (p(x) p(y))`` on the support of ``p``.

    Rows and columns of vertices with ``p = 0`` are held at zero.
    """

    vertex_dist: VertexDistribution
    network_dist: NetworkDistribution

    @property
    def n(self) -> int:
        return self.vertex_dist.n

    @property
    def support(self) -> np.ndarray:
        return self.vertex_dist.support

    @cached_property
    def inv_probs(self) -> np.ndarray:
        p = self.vertex_dist.probs
        inv = np.zeros_like(p)
        inv[p > 0] = 1.0 / p[p > 0]
        return inv

    @cached_property
    def table(self):
        P = self.network_dist.probs
        inv = self.inv_probs
        if sp.issparse(P):
            Dinv = sp.diags(inv)
            return sp.csr_matrix(Dinv @ P @ Dinv)
        return P * np.outer(inv, inv)

    def dense(self) -> np.ndarray:
        t = self.table
        return t.toarray() if sp.issparse(t) else t

    def __call__(self, u, v):
        return grafield_eval(self, u, v)


def build_grafield(vdist: VertexDistribution, ndist: NetworkDistribution,
                   tol: float = 1e-9) -> GraField:
    if vdist.n != ndist.n:
        raise GraphDataError(f"inconsistent distributions: sizes {vdist.n} "
                             f"and {ndist.n}")
    gap = np.max(np.abs(ndist.marginal() - vdist.probs))
    if gap > tol:
        raise GraphDataError(f"inconsistent distributions: marginal gap {gap:.3g}")
    return GraField(vdist, ndist)


def grafield_from_graph(g: Graph) -> GraField:
    """Empirical GraField ``N A(x, y) / (d(x) d(y))``."""
    return build_grafield(empirical_vertex_pmf(g), empirical_network_pmf(g))


def grafield_eval(gf: GraField, u, v) -> float:
    """Evaluate the kernel on the unit square through the quantile map."""
    x = quantile(gf.vertex_dist, u)
    y = quantile(gf.vertex_dist, v)
    t = gf.table
    if sp.issparse(t):
        return float(t[x - 1, y - 1])
    return t[np.asarray(x) - 1, np.asarray(y) - 1]


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Finite basis of step functions on ``(0, 1]``.

    Attributes
    ----------
    kind : str
        ``"bpf"``, ``"characteristic"`` or ``"lp"``.
    values : ndarray or sparse matrix, shape (m, n)
        ``values[j, x]`` is ``xi_j`` at vertex ``x``.
    measure : VertexDistribution
        The pmf defining the inner product and the quantile grid.
    """

    kind: str
    values: object
    measure: VertexDistribution

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.measure.breakpoints

    def dense_values(self) -> np.ndarray:
        v = self.values
        return v.toarray() if sp.issparse(v) else np.asarray(v)

    @cached_property
    def gram(self):
        """``S_jl = sum_x xi_j(x) xi_l(x) p(x)``; sparse for sparse bases."""
        V = self.values
        p = self.measure.probs
        if sp.issparse(V):
            return sp.csr_matrix(V @ sp.diags(p) @ V.T)
        return (V * p) @ V.T

    @cached_property
    def means(self) -> np.ndarray:
        """``integral of eta_j`` over ``(0, 1]``, i.e. ``sum_x xi_j(x) p(x)``."""
        return np.asarray(self.values @ self.measure.probs).ravel()

    def eta(self, u) -> np.ndarray:
        """Values of every ``eta_j`` at level(s) ``u``; shape ``(m,)`` or ``(m, len(u))``."""
        x = quantile(self.measure, u)
        V = self.dense_values()
        return V[:, np.asarray(x) - 1]

    def expand(self, coefficients) -> np.ndarray:
        """Vertex-domain function(s) ``sum_j c_j xi_j``."""
        return np.asarray(self.values.T @ np.asarray(coefficients))


def _require_positive(vdist: VertexDistribution):
    zero = np.flatnonzero(vdist.probs <= 0)
    if zero.size:
        raise GraphDataError("degenerate block amplitude: zero mass at "
                             f"vertices {(zero + 1).tolist()}")


def _diagonal_values(diag):
    if diag.size > DENSE_THRESHOLD:
        return sp.diags(diag, format="csr")
    return np.diag(diag)


def bpf_basis(vdist: VertexDistribution) -> OrthonormalBasis:
    """Degree-adaptive block pulses of height ``p(j)**-0.5`` on each cdf cell."""
    _require_positive(vdist)
    return OrthonormalBasis("bpf", _diagonal_values(vdist.probs ** -0.5), vdist)


def char_basis(vdist: VertexDistribution) -> OrthonormalBasis:
    """Unit indicators of the cdf cells; orthogonal with gram ``diag(p)``."""
    _require_positive(vdist)
    return OrthonormalBasis("characteristic",
                            _diagonal_values(np.ones(vdist.n)), vdist)


def lp_rank(vdist: VertexDistribution) -> int:
    """Largest admissible LP basis size: distinct mid-cdf values on the support, minus one."""
    mid = vdist.mid_cdf[vdist.support]
    return int(np.unique(mid).size) - 1


def lp_basis(vdist: VertexDistribution, m: int,
             rank_tol: float = LP_RANK_TOL) -> OrthonormalBasis:
    """Orthonormal polynomials in the mid-rank score ``T1`` under ``p``.

    ``T1 = sqrt(12) (Fmid - 1/2) / sqrt(1 - sum p^3)``; higher members come
    from Gram-Schmidt on ``T1 * T_{j-1}``, which spans the same space as the
    powers of ``T1`` but stays well conditioned. Each step runs two
    orthogonalization passes against the constant and all previous members.
    """
    if vdist.n < 2:
        raise GraphDataError("LP basis needs at least two vertices")
    if m < 1:
        raise GraphDataError(f"LP basis size must be >= 1, got {m}")
    r = lp_rank(vdist)
    if m > r:
        raise GraphDataError(f"LP rank exceeded: requested m={m}, "
                             f"achievable maximum is {r}")
    p = vdist.probs

    def inner(a, b):
        return float(np.dot(a * p, b))

    T1 = np.sqrt(12.0) * (vdist.mid_cdf - 0.5) / np.sqrt(1.0 - np.sum(p ** 3))
    T1 = T1 - inner(T1, np.ones_like(T1))
    T1 = T1 / np.sqrt(inner(T1, T1))
    basis = [T1]
    for j in range(1, m):
        cand = T1 * basis[-1]
        before = np.sqrt(inner(cand, cand))
        for _ in range(2):
            cand = cand - inner(cand, np.ones_like(cand))
            for b in basis:
                cand = cand - inner(cand, b) * b
        after = np.sqrt(inner(cand, cand))
        if after < rank_tol * before:
            raise GraphDataError(f"LP rank exceeded: member {j + 1} is "
                                 "numerically dependent on lower ones")
        basis.append(cand / after)
    return OrthonormalBasis("lp", np.vstack(basis), vdist)
