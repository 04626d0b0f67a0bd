"""Reading and writing graphs, event matrices and run results."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .changepoint import EventMatrix
from .errors import GraphDataError
from .graph import Graph, build_graph

FLOAT_FMT = "%.12g"


def _is_matrix_market(path) -> bool:
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        return fh.readline().lstrip().lower().startswith("%%matrixmarket")


def parse_edgelist(path, allow_self_loops: bool = False) -> Graph:
    """Read a weighted undirected graph.

    Plain text files hold one edge per line, ``u v [w]`` separated by tabs
    or spaces, with 1-based vertex ids and ``#`` comments. Repeated edges
    are summed; a ``# n=<count>`` comment declares trailing isolated
    vertices. Files starting with a ``%%MatrixMarket`` header are read as
    MatrixMarket coordinate matrices and must be symmetric.
    """
    path = Path(path)
    if _is_matrix_market(path):
        return _parse_matrix_market(path, allow_self_loops)
    edges = []
    n_declared = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body, _, comment = line.partition("#")
            body = body.strip()
            if comment.strip().startswith("n="):
                try:
                    n_declared = int(comment.strip()[2:])
                except ValueError:
                    raise GraphDataError(f"{path}:{lineno}: bad vertex count "
                                         f"{comment.strip()!r}") from None
            if not body:
                continue
            parts = body.split()
            if len(parts) not in (2, 3):
                raise GraphDataError(f"{path}:{lineno}: expected 'u v [w]', "
                                     f"got {len(parts)} fields")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise GraphDataError(f"{path}:{lineno}: malformed edge "
                                     f"{body!r}") from None
            if u < 1 or v < 1:
                raise GraphDataError(f"{path}:{lineno}: bad vertex id, ids are 1-based")
            if not np.isfinite(w) or w < 0:
                raise GraphDataError(f"{path}:{lineno}: bad edge weight {parts[2]!r}")
            edges.append((u, v, w))
    if not edges:
        raise GraphDataError("empty graph")
    n = max(n_declared, max(max(u, v) for u, v, _ in edges))
    return build_graph(edges, n, allow_self_loops=allow_self_loops)


def _parse_matrix_market(path, allow_self_loops):
    try:
        M = scipy.io.mmread(str(path))
    except (ValueError, IndexError) as exc:
        raise GraphDataError(f"{path}: bad MatrixMarket file: {exc}") from None
    M = sp.csr_matrix(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise GraphDataError(f"{path}: MatrixMarket matrix is not square {M.shape}")
    diff = abs(M - M.T)
    if diff.nnz and diff.max() > 1e-12 * max(abs(M).max(), 1.0):
        raise GraphDataError(f"{path}: MatrixMarket matrix is not symmetric")
    return Graph.from_adjacency(M, allow_self_loops=allow_self_loops)


def write_edgelist(g: Graph, path) -> None:
    """Write ``g`` as ``u<TAB>v<TAB>w`` lines (upper triangle) that parse back exactly."""
    A = sp.triu(sp.csr_matrix(g.adjacency)).tocoo()
    order = np.lexsort((A.col, A.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        for i in order:
            fh.write(f"{A.row[i] + 1}\t{A.col[i] + 1}\t{float(A.data[i])!r}\n")


def parse_event_matrix(path) -> EventMatrix:
    """Read a CSV with a header row; column 1 is a timestamp or index, the rest 0/1."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise GraphDataError(f"{path}: event matrix needs a header and data rows")
    header, body = rows[0], rows[1:]
    d = len(header) - 1
    if d < 1:
        raise GraphDataError(f"{path}: no feature columns")
    values = np.zeros((len(body), d), dtype=np.uint8)
    stamps = []
    for i, row in enumerate(body, start=1):
        if len(row) != d + 1:
            raise GraphDataError(f"{path}: row {i} has {len(row)} fields, "
                                 f"expected {d + 1}")
        stamps.append(row[0].strip())
        for j, cell in enumerate(row[1:], start=1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise GraphDataError(f"{path}: non-binary value {cell!r} at "
                                     f"row {i}, column {j} ({header[j].strip()})")
            values[i - 1, j - 1] = cell == "1"
    return EventMatrix(values, timestamps=stamps,
                       feature_names=[h.strip() for h in header[1:]])


def write_event_matrix(z: EventMatrix, path) -> None:
    names = z.feature_names or [f"f{j + 1}" for j in range(z.d)]
    stamps = z.timestamps or [str(i + 1) for i in range(z.n)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", *names])
        for s, row in zip(stamps, z.values):
            w.writerow([s, *row.tolist()])


def _fmt(x) -> str:
    return FLOAT_FMT % x


def write_embedding(path, coords, ids=None) -> None:
    """``vertex,phi_1,...,phi_k`` rows."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    n, k = coords.shape
    ids = range(1, n + 1) if ids is None else ids
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["vertex", *[f"phi_{j + 1}" for j in range(k)]]) + "\n")
        for v, row in zip(ids, coords):
            fh.write(",".join([str(v), *map(_fmt, row)]) + "\n")


def write_spectrum(path, eigenvalues) -> None:
    """``k,lambda`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,lambda\n")
        for j, lam in enumerate(np.asarray(eigenvalues, dtype=float), start=1):
            fh.write(f"{j},{_fmt(lam)}\n")


def write_scores(path, scores, name="score") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"vertex,{name}\n")
        for v, s in enumerate(np.asarray(scores, dtype=float), start=1):
            fh.write(f"{v},{_fmt(s)}\n")


def _round_floats(obj):
    if isinstance(obj, float):
        return float(_fmt(obj)) if np.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round_floats(obj.item())
    return obj


def write_json(path, payload: dict) -> None:
    """JSON with floats at 12 significant digits; non-finite values become strings."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round_floats(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
