"""Graph storage and the empirical probability objects built from it.

Vertex ids in the public API (edge lists, :func:`quantile`) are 1-based to
match the on-disk formats. Arrays are ordinary 0-based numpy arrays.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import GraphDataError

#: Graphs with more vertices than this keep a sparse CSR adjacency.
DENSE_THRESHOLD = 8192


def _readonly(a):
    if isinstance(a, np.ndarray):
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted undirected graph.

    ``adjacency`` is a dense ``ndarray`` for small graphs and a CSR matrix
    above :data:`DENSE_THRESHOLD`; every consumer accepts either.
    """

    adjacency: object
    degrees: np.ndarray = field(init=False)
    volume: float = field(init=False)
    vertex_order: np.ndarray = field(default=None)
    self_loops: bool = False

    def __post_init__(self):
        A = self.adjacency
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=float)
            degrees = np.asarray(A.sum(axis=1)).ravel()
        else:
            A = np.array(A, dtype=float)
            degrees = A.sum(axis=1)
        object.__setattr__(self, "adjacency", _readonly(A))
        object.__setattr__(self, "degrees", _readonly(degrees))
        object.__setattr__(self, "volume", float(degrees.sum()))
        order = self.vertex_order
        if order is None:
            order = np.arange(1, A.shape[0] + 1)
        object.__setattr__(self, "vertex_order", _readonly(np.asarray(order)))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.adjacency)

    def dense(self) -> np.ndarray:
        """Adjacency as a dense array (a copy when stored sparse)."""
        if self.is_sparse:
            return self.adjacency.toarray()
        return self.adjacency

    def zero_degree_vertices(self) -> np.ndarray:
        """1-based ids of isolated vertices."""
        return np.flatnonzero(self.degrees <= 0) + 1

    def subgraph(self, keep: np.ndarray) -> "Graph":
        """Induced subgraph on a boolean vertex mask, order preserved."""
        keep = np.asarray(keep, dtype=bool)
        A = self.adjacency
        if self.is_sparse:
            sub = A[keep][:, keep]
        else:
            sub = A[np.ix_(keep, keep)]
        return Graph(sub, vertex_order=self.vertex_order[keep],
                     self_loops=self.self_loops)

    @classmethod
    def from_adjacency(cls, adjacency, allow_self_loops=False,
                       dense_threshold=DENSE_THRESHOLD, atol=1e-12) -> "Graph":
        """Validate a square weight matrix and wrap it as a :class:`Graph`."""
        A = adjacency
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=float)
            if A.shape[0] != A.shape[1]:
                raise GraphDataError("adjacency must be square")
            if A.nnz and A.data.min() < 0:
                raise GraphDataError("negative edge weight")
            asym = abs(A - A.T)
            if asym.nnz and asym.max() > atol:
                raise GraphDataError("adjacency is not symmetric")
            has_loops = A.diagonal().any()
        else:
            A = np.asarray(A, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise GraphDataError("adjacency must be square")
            if (A < 0).any():
                raise GraphDataError("negative edge weight")
            if not np.allclose(A, A.T, rtol=0, atol=atol):
                raise GraphDataError("adjacency is not symmetric")
            has_loops = np.diag(A).any()
        if has_loops and not allow_self_loops:
            raise GraphDataError("self-loop present but self loops are disabled")
        if A.shape[0] == 0 or A.sum() <= 0:
            raise GraphDataError("empty graph")
        if A.shape[0] > dense_threshold:
            A = sp.csr_matrix(A)
        elif sp.issparse(A):
            A = A.toarray()
        return cls(A, self_loops=allow_self_loops)


def build_graph(edges: Iterable, n: int, allow_self_loops: bool = False,
                dense_threshold: int = DENSE_THRESHOLD) -> Graph:
    """Assemble a symmetric graph from ``(u, v, w)`` triples.

    Ids are 1-based. Duplicate edges are summed. A self loop ``(u, u, w)``
    adds ``w`` once to ``A[u, u]`` and hence once to the degree of ``u``.
    """
    rows, cols, vals = [], [], []
    for edge in edges:
        if len(edge) == 2:
            u, v = edge
            w = 1.0
        else:
            u, v, w = edge
        u, v, w = int(u), int(v), float(w)
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphDataError(f"bad vertex id: edge ({u}, {v}) with n={n}")
        if not w >= 0:
            raise GraphDataError(f"negative edge weight on ({u}, {v})")
        if u == v:
            if not allow_self_loops:
                raise GraphDataError(f"self-loop on vertex {u} rejected")
            rows.append(u - 1)
            cols.append(u - 1)
            vals.append(w)
            continue
        rows += [u - 1, v - 1]
        cols += [v - 1, u - 1]
        vals += [w, w]
    if not vals or sum(vals) <= 0:
        raise GraphDataError("empty graph")
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    if n <= dense_threshold:
        A = A.toarray()
    return Graph(A, self_loops=allow_self_loops)


@dataclass(frozen=True, eq=False)
class VertexDistribution:
    """Probability mass function over vertices in label order.

    ``kind`` records provenance: ``"empirical"``, ``"laplace"`` or
    ``"good-turing"``. ``raw`` keeps the un-normalized Good-Turing masses.
    """

    probs: np.ndarray
    kind: str = "empirical"
    tau: Optional[float] = None
    raw: Optional[np.ndarray] = None
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise GraphDataError("probabilities must be a non-empty vector")
        if (p < 0).any():
            raise GraphDataError("negative probability")
        if abs(p.sum() - 1.0) > 1e-9:
            raise GraphDataError(f"probabilities sum to {p.sum()!r}, not 1")
        c = np.cumsum(p)
        # dividing by the total pins cdf[-1] to exactly 1 and keeps monotonicity
        c = c / c[-1]
        object.__setattr__(self, "probs", _readonly(p))
        object.__setattr__(self, "cdf", _readonly(c))
        if self.raw is not None:
            object.__setattr__(self, "raw", _readonly(np.array(self.raw, dtype=float)))

    @property
    def n(self) -> int:
        return self.probs.size

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of vertices with positive mass."""
        return self.probs > 0

    @property
    def mid_cdf(self) -> np.ndarray:
        """Mid-distribution function ``F(x) - p(x)/2``."""
        return self.cdf - 0.5 * self.probs

    @property
    def breakpoints(self) -> np.ndarray:
        """The grid ``0, F(1), ..., F(n)`` on the unit interval."""
        return np.concatenate([[0.0], self.cdf])

    def quantile(self, u):
        return quantile(self, u)


@dataclass(frozen=True, eq=False)
class NetworkDistribution:
    """Joint probability mass function over vertex pairs."""

    probs: object
    kind: str = "empirical"
    tau: Optional[float] = None

    def __post_init__(self):
        P = self.probs
        if sp.issparse(P):
            P = sp.csr_matrix(P, dtype=float)
        else:
            P = np.array(P, dtype=float)
        object.__setattr__(self, "probs", _readonly(P))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def marginal(self) -> np.ndarray:
        return np.asarray(self.probs.sum(axis=1)).ravel()

    def dense(self) -> np.ndarray:
        if sp.issparse(self.probs):
            return self.probs.toarray()
        return self.probs


def empirical_vertex_pmf(g: Graph) -> VertexDistribution:
    """Degree-proportional vertex pmf ``d / N``.

    Isolated vertices get mass 0 and trigger a warning, since they have no
    well-defined quantile cell.
    """
    if g.volume <= 0:
        raise GraphDataError("empty graph")
    isolated = g.zero_degree_vertices()
    if isolated.size:
        warnings.warn(f"zero-degree vertices {isolated.tolist()} get "
                      "probability 0 and are excluded from spectral bases",
                      stacklevel=2)
    return VertexDistribution(g.degrees / g.volume, kind="empirical")


def empirical_network_pmf(g: Graph) -> NetworkDistribution:
    if g.volume <= 0:
        raise GraphDataError("empty graph")
    return NetworkDistribution(g.adjacency / g.volume, kind="empirical")


def quantile(dist: VertexDistribution, u):
    """Left-continuous quantile: the smallest 1-based vertex ``x`` with ``F(x) >= u``.

    Accepts a scalar or an array of levels in ``(0, 1]``.
    """
    u_arr = np.asarray(u, dtype=float)
    if (u_arr <= 0).any() or (u_arr > 1).any():
        raise GraphDataError(f"u out of range (0, 1]: {u!r}")
    idx = np.searchsorted(dist.cdf, u_arr, side="left") + 1
    if np.ndim(idx) == 0:
        return int(idx)
    return idx
