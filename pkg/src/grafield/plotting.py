"""Static figures for the CLI: coordinate traces with change points, and scree plots."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so reruns write identical files
_SVG_META = {"Date": None}
matplotlib.rcParams["svg.hashsalt"] = "grafield"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_trace(path, phi1, boundaries=(), raw=None, title=None):
    """Index versus the leading coordinate, dashed lines at change points.

    Parameters
    ----------
    phi1 : array_like
        Smooth coordinate, drawn as a red line.
    boundaries : sequence of int
        1-based rows after which a change occurs.
    raw : array_like, optional
        Unsmoothed reference coordinate (e.g. from the exact Laplacian),
        drawn as grey dots.
    """
    phi1 = np.asarray(phi1, dtype=float)
    idx = np.arange(1, phi1.size + 1)
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    if raw is not None:
        ax.plot(idx, raw, ".", color="0.6", ms=3, label="exact")
    ax.plot(idx, phi1, "-", color="red", lw=1.5, label="LP")
    for b in boundaries:
        ax.axvline(b + 0.5, color="k", ls="--", lw=0.8)
    ax.set_xlabel("index")
    ax.set_ylabel(r"$\hat\phi_1$")
    if title:
        ax.set_title(title)
    if raw is not None:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_spectrum(path, eigenvalues, title=None):
    """Eigenvalue against its index."""
    lam = np.asarray(eigenvalues, dtype=float)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(np.arange(1, lam.size + 1), lam, "o-", color="C0", ms=4, lw=1)
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\hat\lambda_k$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)
