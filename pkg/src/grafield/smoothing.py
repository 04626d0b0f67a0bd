"""Shrinkage estimators for vertex, network and transition probabilities.

Additive (Laplace) smoothing with flattening constant ``tau`` pulls the
degree pmf toward the uniform distribution. Applied to the vertex pmf only
it yields the Type-I regularized Laplacian; applied to the joint pmf it is
the Type-II form; applied row-wise to the random walk it is PageRank-style
teleportation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GraphDataError
from .graph import Graph, NetworkDistribution, VertexDistribution

TAU_PRESETS = ("laplace", "krichevsky-trofimov", "perks", "minimax",
               "stein-optimal")

_ALIASES = {
    "kt": "krichevsky-trofimov",
    "stein": "stein-optimal",
}


@dataclass(frozen=True)
class TauChoice:
    """A named or fixed flattening constant and its resolved value.

    ``value`` may be ``math.inf``, meaning full shrinkage to uniform.
    """

    kind: str
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise GraphDataError(f"bad shrinkage parameter: {self.value!r}")


@dataclass(frozen=True, eq=False)
class RiskCurve:
    taus: np.ndarray
    risks: np.ndarray

    @property
    def argmin(self) -> float:
        return float(self.taus[np.argmin(self.risks)])


def _check_tau(tau):
    if tau is None or np.isnan(tau) or tau < 0:
        raise GraphDataError(f"bad shrinkage parameter: {tau!r}")


def laplace_smooth_vertex(degrees, N, tau) -> VertexDistribution:
    """``(d_j + tau) / (N + n tau)``; ``tau = inf`` gives the exact uniform pmf."""
    d = np.asarray(degrees, dtype=float)
    _check_tau(tau)
    if N <= 0:
        raise GraphDataError("empty graph")
    n = d.size
    if math.isinf(tau):
        probs = np.full(n, 1.0 / n)
    else:
        probs = (d + tau) / (N + n * tau)
    return VertexDistribution(probs, kind="laplace", tau=float(tau))


def stein_optimal_tau(degrees, N=None, n=None) -> float:
    """Closed-form MSE-optimal flattening constant.

    ``(N^2 - sum d^2) / (n sum d^2 - N^2)``. A non-positive denominator means
    the degrees are (numerically) regular, so the empirical pmf is already
    uniform and full shrinkage is returned as ``inf``.
    """
    d = np.asarray(degrees, dtype=float)
    N = float(d.sum()) if N is None else float(N)
    n = d.size if n is None else int(n)
    if N <= 0:
        raise GraphDataError("empty graph")
    sq = float(np.dot(d, d))
    num = N * N - sq
    den = n * sq - N * N
    if den <= 1e-12 * N * N:
        return math.inf
    return num / den


def resolve_tau(kind, n, N, degrees=None) -> TauChoice:
    """Turn a preset name (or a number) into a :class:`TauChoice`."""
    if n < 2 or N <= 0:
        raise GraphDataError("tau presets need n >= 2 and N > 0")
    if isinstance(kind, (int, float)) and not isinstance(kind, bool):
        return TauChoice("fixed", float(kind))
    key = _ALIASES.get(str(kind).lower(), str(kind).lower())
    if key == "laplace":
        value = 1.0
    elif key == "krichevsky-trofimov":
        value = 0.5
    elif key == "perks":
        value = 1.0 / n
    elif key == "minimax":
        value = math.sqrt(N) / n
    elif key == "stein-optimal":
        if degrees is None:
            raise GraphDataError("stein-optimal tau needs the degree vector")
        value = stein_optimal_tau(degrees, N, n)
    else:
        try:
            return TauChoice("fixed", float(kind))
        except (TypeError, ValueError):
            raise GraphDataError(f"unknown preset: {kind!r}") from None
    return TauChoice(key, value)


def mse_risk(p_true, N, tau) -> float:
    """Population MSE of the Laplace estimator under multinomial sampling.

    Parameters
    ----------
    p_true : VertexDistribution or array_like
        The true pmf.
    N : int
        Number of multinomial draws (graph volume).
    tau : float
        Flattening constant, ``>= 0``.
    """
    p = p_true.probs if isinstance(p_true, VertexDistribution) else np.asarray(p_true, float)
    _check_tau(tau)
    n = p.size
    var = p * (1.0 - p) / N
    second = var + (p - 1.0 / n) ** 2
    if math.isinf(tau):
        shrink = 1.0
    else:
        shrink = n * tau / (N + n * tau)
    return float((1.0 - 2.0 * shrink) * var.sum() + shrink ** 2 * second.sum())


def risk_curve(p_true, N, taus) -> RiskCurve:
    taus = np.asarray(taus, dtype=float)
    return RiskCurve(taus, np.array([mse_risk(p_true, N, t) for t in taus]))


def population_optimal_tau(p_true) -> float:
    """Minimizer of :func:`mse_risk` in closed form, ``(1 - sum p^2)/(n sum p^2 - 1)``."""
    p = p_true.probs if isinstance(p_true, VertexDistribution) else np.asarray(p_true, float)
    sq = float(np.dot(p, p))
    den = p.size * sq - 1.0
    if den <= 1e-15:
        return math.inf
    return (1.0 - sq) / den


def good_turing(degrees) -> VertexDistribution:
    """Good-Turing vertex pmf from integer degrees, renormalized to sum 1.

    The un-normalized masses ``(c_{d+1} / c_d) (d + 1) / N`` are kept in
    ``raw``, where ``c_k`` counts vertices of degree ``k``.
    """
    d = np.asarray(degrees, dtype=float)
    if not np.all(np.isfinite(d)) or not np.all(d == np.round(d)) or (d < 0).any():
        raise GraphDataError("Good-Turing needs non-negative integer degrees")
    d = d.astype(np.int64)
    N = d.sum()
    if N <= 0:
        raise GraphDataError("empty graph")
    counts = np.bincount(d, minlength=d.max() + 2)
    raw = counts[d + 1] / counts[d] * (d + 1) / N
    total = raw.sum()
    if total <= 0:
        raise GraphDataError("degenerate Good-Turing: no two adjacent occupied "
                             "degree counts")
    return VertexDistribution(raw / total, kind="good-turing", raw=raw)


def laplace_smooth_network(g: Graph, tau) -> NetworkDistribution:
    """Joint pmf of ``A + (tau/n) 11^T``, i.e. ``(A + tau/n) / (N + n tau)``.

    The result is dense whenever ``tau > 0``.
    """
    _check_tau(tau)
    if math.isinf(tau):
        raise GraphDataError("network smoothing needs a finite tau")
    n = g.n
    if tau == 0:
        return NetworkDistribution(g.adjacency / g.volume, kind="laplace-2d", tau=0.0)
    P = (g.dense() + tau / n) / (g.volume + n * tau)
    return NetworkDistribution(P, kind="laplace-2d", tau=float(tau))


def smooth_transition(g: Graph, tau) -> np.ndarray:
    """Row-smoothed random walk ``(A + tau/n) / (d_i + tau)``."""
    _check_tau(tau)
    if math.isinf(tau):
        return np.full((g.n, g.n), 1.0 / g.n)
    denom = g.degrees + tau
    if (denom <= 0).any():
        bad = (np.flatnonzero(denom <= 0) + 1).tolist()
        raise GraphDataError(f"dangling vertex with zero smoothing: {bad}")
    return (g.dense() + tau / g.n) / denom[:, None]


def teleport_weights(g: Graph, tau) -> np.ndarray:
    """Per-row teleport mass ``tau / (d_i + tau)``."""
    _check_tau(tau)
    return tau / (g.degrees + tau)
