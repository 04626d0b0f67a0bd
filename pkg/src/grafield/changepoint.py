"""Change points in binary time series via an LP-smoothed T-graph.

Rows of a binary event matrix become vertices of a time-indexed graph
weighted by the squared Pearson phi coefficient between rows. The leading
LP-compressed spectral coordinate is clustered in one dimension and the
cluster changes along time are read off as boundaries.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import lp_spectral
from .errors import GraphDataError
from .graph import Graph

IMPURITY_THRESHOLD = 0.2
EIGENGAP_THRESHOLD = 4.0
SMOOTHING_WINDOW = 5


@dataclass(frozen=True, eq=False)
class EventMatrix:
    """``n`` time points by ``d`` binary features, rows in temporal order."""

    values: np.ndarray
    timestamps: Optional[Sequence[str]] = None
    feature_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        z = np.asarray(self.values)
        if z.ndim != 2:
            raise GraphDataError("event matrix must be two-dimensional")
        n, d = z.shape
        if n < 2 or d < 1:
            raise GraphDataError(f"event matrix needs n >= 2 and d >= 1, got {z.shape}")
        bad = ~np.isin(z, (0, 1))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise GraphDataError(f"non-binary value {z[r, c]!r} at row {r + 1}, "
                                 f"column {c + 1}")
        z = z.astype(np.uint8)
        z.setflags(write=False)
        object.__setattr__(self, "values", z)
        if self.timestamps is not None and len(self.timestamps) != n:
            raise GraphDataError("timestamp count does not match rows")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class ChangePointReport:
    """Output of :func:`detect_changepoints`.

    ``boundaries`` are 1-based: a boundary ``b`` means the change happens
    between rows ``b`` and ``b + 1``.
    """

    boundaries: list
    labels: np.ndarray
    raw_labels: np.ndarray
    phi: np.ndarray
    eigenvalues: np.ndarray
    impurity: float
    eigengap: float
    m: int
    k: int
    params: dict = field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) + 1

    @property
    def phi1(self) -> np.ndarray:
        return self.phi[:, 0]

    @property
    def unstable(self) -> bool:
        """Segmentation is not trustworthy.

        True when the labels disagree with their segment majority too
        often, when the labels fragment into more than ``k`` runs, or when
        the retained eigenvalues are not separated from the next one.
        """
        return bool(self.impurity > IMPURITY_THRESHOLD
                    or self.n_segments > self.k
                    or self.eigengap < EIGENGAP_THRESHOLD)

    def to_dict(self) -> dict:
        return {
            "boundaries": [int(b) for b in self.boundaries],
            "n_segments": self.n_segments,
            "impurity": float(self.impurity),
            "eigengap": float(self.eigengap),
            "unstable": self.unstable,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "m": self.m,
            "k": self.k,
            "n": int(self.labels.size),
            "compression_ratio": round(self.labels.size / self.m, 2),
            **self.params,
        }


def phi2_weights(z: EventMatrix):
    """Squared phi coefficients between rows and a mask of constant rows."""
    X = z.values.astype(float)
    d = X.shape[1]
    r1 = X.sum(axis=1)
    n11 = X @ X.T
    n10 = r1[:, None] - n11
    n01 = r1[None, :] - n11
    n00 = d - r1[:, None] - r1[None, :] + n11
    margins = np.outer(r1 * (d - r1), r1 * (d - r1))
    constant = (r1 == 0) | (r1 == d)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = (n11 * n00 - n10 * n01) / np.sqrt(margins)
    phi[~np.isfinite(phi)] = 0.0
    W = np.clip(phi * phi, 0.0, 1.0)
    np.fill_diagonal(W, 0.0)
    return W, constant


def phi2_graph(z: EventMatrix) -> Graph:
    """T-graph over time points weighted by ``phi^2`` between binary rows.

    Constant rows have no defined association and are given zero weight.
    """
    W, constant = phi2_weights(z)
    if constant.any():
        warnings.warn(f"constant rows {(np.flatnonzero(constant) + 1).tolist()} "
                      "have undefined phi and get zero association",
                      stacklevel=2)
    if W.sum() <= 0:
        raise GraphDataError("degenerate association graph: all weights are 0")
    return Graph(W)


def _segment_cost(csum, csum2, cw, i, j):
    """Weighted SSE of sorted distinct values ``i..j-1`` from prefix sums."""
    w = cw[j] - cw[i]
    s = csum[j] - csum[i]
    return (csum2[j] - csum2[i]) - s * s / w


def kmeans_1d(values, k: int) -> np.ndarray:
    """Globally optimal 1-D k-means by dynamic programming.

    Runs over the distinct values (weighted by multiplicity), so equal
    values always share a cluster; with fewer than ``k`` distinct values
    fewer clusters are returned. Labels are ``0..k'-1`` in increasing order
    of cluster center, and among equally good splits the one with the
    earliest cut wins.
    """
    x = np.asarray(values, dtype=float).ravel()
    if k < 1:
        raise GraphDataError("k must be >= 1")
    if x.size < k:
        raise GraphDataError(f"need at least k={k} values, got {x.size}")
    uniq, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    r = uniq.size
    k_eff = min(k, r)
    cw = np.concatenate([[0.0], np.cumsum(counts)])
    csum = np.concatenate([[0.0], np.cumsum(counts * uniq)])
    csum2 = np.concatenate([[0.0], np.cumsum(counts * uniq * uniq)])

    # cost[c, j]: best SSE of first j distinct values in c+1 clusters
    cost = np.full((k_eff, r + 1), np.inf)
    back = np.zeros((k_eff, r + 1), dtype=np.int64)
    j = np.arange(1, r + 1)
    cost[0, 1:] = _segment_cost(csum, csum2, cw, 0, j)
    for c in range(1, k_eff):
        for jj in range(c + 1, r + 1):
            i = np.arange(c, jj)
            cand = cost[c - 1, i] + _segment_cost(csum, csum2, cw, i, jj)
            best = int(np.argmin(cand))
            cost[c, jj] = cand[best]
            back[c, jj] = i[best]
    cuts = [r]
    for c in range(k_eff - 1, 0, -1):
        cuts.append(int(back[c, cuts[-1]]))
    cuts = cuts[::-1]
    label_of_unique = np.zeros(r, dtype=np.int64)
    start = 0
    for lab, end in enumerate(cuts):
        label_of_unique[start:end] = lab
        start = end
    return label_of_unique[inverse]


def within_ss(values, labels) -> float:
    x = np.asarray(values, dtype=float)
    total = 0.0
    for lab in np.unique(labels):
        seg = x[labels == lab]
        total += float(((seg - seg.mean()) ** 2).sum())
    return total


def majority_smooth(labels, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Centered moving mode; a tied window keeps the original label."""
    labels = np.asarray(labels)
    h = window // 2
    out = labels.copy()
    for i in range(labels.size):
        seg = labels[max(0, i - h):i + h + 1]
        vals, cnt = np.unique(seg, return_counts=True)
        top = cnt == cnt.max()
        if top.sum() == 1:
            out[i] = vals[np.argmax(cnt)]
    return out


def label_boundaries(labels) -> list:
    """1-based row indices after which the label changes."""
    labels = np.asarray(labels)
    return [int(i) + 1 for i in np.flatnonzero(labels[1:] != labels[:-1])]


def segment_impurity(raw_labels, boundaries) -> float:
    """Fraction of rows whose label differs from their segment's majority label."""
    raw_labels = np.asarray(raw_labels)
    edges = [0, *boundaries, raw_labels.size]
    wrong = 0
    for a, b in zip(edges[:-1], edges[1:]):
        _, cnt = np.unique(raw_labels[a:b], return_counts=True)
        wrong += (b - a) - cnt.max()
    return wrong / raw_labels.size


def _best_split(phi, segments, window):
    """Best contiguous two-way split of one segment along one coordinate."""
    best = None
    for si, (a, b) in enumerate(segments):
        if b - a < 2:
            continue
        for c in range(phi.shape[1]):
            x = phi[a:b, c]
            total = float(((x - x.mean()) ** 2).sum())
            if total <= 0:
                continue
            lab = majority_smooth(kmeans_1d(x, 2), window)
            for cut in label_boundaries(lab):
                left, right = x[:cut], x[cut:]
                kept = (((left - left.mean()) ** 2).sum()
                        + ((right - right.mean()) ** 2).sum())
                scale = float(((phi[:, c] - phi[:, c].mean()) ** 2).sum())
                gain = (total - kept) / scale
                if best is None or gain > best[0]:
                    best = (gain, si, a + cut)
    return best


def _recursive_segments(phi, k, window):
    n = phi.shape[0]
    segments = [(0, n)]
    for _ in range(k - 1):
        best = _best_split(phi, segments, window)
        if best is None:
            break
        _, si, cut = best
        a, b = segments.pop(si)
        segments[si:si] = [(a, cut), (cut, b)]
    return segments


def detect_changepoints(z: EventMatrix, m: int = 15, k: int = 2,
                        window: int = SMOOTHING_WINDOW) -> ChangePointReport:
    """T-graph, LP embedding, 1-D clustering and boundary extraction.

    Parameters
    ----------
    z : EventMatrix
    m : int
        LP basis size.
    k : int
        Number of regimes (``>= 2``). ``k = 2`` clusters the leading
        coordinate directly; larger ``k`` splits segments recursively,
        each time choosing the segment and coordinate (among the top
        ``k - 1``) with the largest variance reduction.
    window : int
        Majority-smoothing window applied to labels before reading
        boundaries.
    """
    if k < 2:
        raise GraphDataError("k must be >= 2")
    g = phi2_graph(z)
    k0 = min(k, m)
    emb = lp_spectral(g, m, k0)
    lam = emb.eigenvalues
    phi = emb.coordinates[:, :k - 1]
    if k0 > k - 1 and abs(lam[k - 1]) > 0:
        eigengap = float(lam[k - 2] / abs(lam[k - 1]))
    else:
        eigengap = float("inf")

    if k == 2:
        raw = kmeans_1d(phi[:, 0], 2)
        labels = majority_smooth(raw, window)
        boundaries = label_boundaries(labels)
    else:
        segments = _recursive_segments(phi, k, window)
        labels = np.concatenate([np.full(b - a, i) for i, (a, b) in enumerate(segments)])
        centers = np.array([phi[a:b].mean(axis=0) for a, b in segments])
        dist = ((phi[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        raw = np.argmin(dist, axis=1)
        boundaries = [b for _, b in segments[:-1]]
    impurity = segment_impurity(raw, boundaries)
    return ChangePointReport(boundaries, labels, raw, phi, lam, impurity,
                             eigengap, m, k, {"window": window})


def planted_event_matrix(n: int = 200, d: int = 20, shifts=(100,), seed: int = 42,
                         low: float = 0.2, high: float = 0.8) -> EventMatrix:
    """Binary matrix whose feature means change at the given rows.

    Features fall in four equal groups. Groups 1-2 start at ``low`` and
    groups 3-4 at ``high``; at each shift group 1 and group 4 swap level
    (``low <-> high``). Consecutive regimes therefore have uncorrelated
    mean profiles, which is what the squared phi association can detect.
    """
    rng = np.random.default_rng(seed)
    q = d // 4
    if q < 1:
        raise GraphDataError("need d >= 4 features")
    base = np.full(d, low)
    base[2 * q:] = high
    alt = base.copy()
    alt[:q] = high
    alt[3 * q:4 * q] = low
    means = np.empty((n, d))
    edges = [0, *sorted(shifts), n]
    for r, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        means[a:b] = base if r % 2 == 0 else alt
    return EventMatrix((rng.random((n, d)) < means).astype(np.uint8))
