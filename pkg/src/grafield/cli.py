"""Command line front end.

Commands
--------
analyze     embedding, spectrum, report and figures for one operator
embed       embedding and spectrum CSVs only
changepoint change points in a binary event matrix (or a simulated one)
compare     engine-identity deviations for every operator pair
pagerank    stationary scores of the teleporting walk

Exit status is 0 on success, 1 on usage errors and 2 on data or I/O errors.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import io, plotting
from .changepoint import detect_changepoints, planted_event_matrix
from .engine import lp_spectral, unified_spectral
from .errors import ConvergenceError, GraphDataError
from .operators import diffusion_map, engine_identities, pagerank_scores
from .smoothing import resolve_tau

OPERATORS = ("laplacian", "modularity", "diffusion", "type1", "type2", "pagerank")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _tau_arg(text):
    key = text.lower()
    if key in ("laplace", "kt", "perks", "minimax", "stein"):
        return key
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected laplace|kt|perks|minimax|stein or a number, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"tau must be >= 0, got {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _alpha_arg(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grafield",
                     description="Nonparametric spectral graph analysis.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, graph_input=True):
        if graph_input:
            p.add_argument("input", help="edge list (u v [w]) or MatrixMarket file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=42, help="random seed (default: 42)")

    def spectral(p):
        p.add_argument("--operator", choices=OPERATORS, default="laplacian")
        p.add_argument("--tau", type=_tau_arg, default="minimax",
                       help="flattening constant for type1/type2 (default: minimax)")
        p.add_argument("--alpha", type=_alpha_arg, default=0.15,
                       help="pagerank teleport probability (default: 0.15)")
        p.add_argument("--m", type=_positive_int, default=None,
                       help="use an m-term LP basis instead of the exact one")
        p.add_argument("--k", type=_positive_int, default=None,
                       help="number of coordinates to keep")
        p.add_argument("--t", type=int, default=1, help="diffusion time (default: 1)")

    p = sub.add_parser("analyze", help="embedding, spectrum, report and figures")
    common(p)
    spectral(p)
    p = sub.add_parser("embed", help="embedding and spectrum only")
    common(p)
    spectral(p)

    p = sub.add_parser("changepoint", help="change points in a binary event matrix")
    p.add_argument("input", nargs="?", help="CSV: header, index column, 0/1 features")
    common(p, graph_input=False)
    p.add_argument("--simulate", action="store_true",
                   help="use a planted-shift matrix (n=200, d=20, shift after row 100)")
    p.add_argument("--m", type=_positive_int, default=15, help="LP basis size (default: 15)")
    p.add_argument("--k", type=_positive_int, default=2, help="number of regimes (default: 2)")

    p = sub.add_parser("compare", help="engine-identity deviations")
    common(p)
    p.add_argument("--tau", type=_tau_arg, default="minimax")
    p.add_argument("--alpha", type=_alpha_arg, default=0.15)
    p.add_argument("--t", type=int, default=2)

    p = sub.add_parser("pagerank", help="teleporting random walk scores")
    common(p)
    p.add_argument("--alpha", type=_alpha_arg, default=0.15)
    return parser


def _embedding(g, args):
    """Run the selected operator; returns (eigenvalues, coordinates, info)."""
    op = args.operator
    info = {"operator": op, "n": g.n, "volume": float(g.volume)}
    if args.m is not None:
        if op not in ("laplacian", "diffusion"):
            raise UsageError("--m applies to the laplacian and diffusion operators")
        emb = lp_spectral(g, args.m, args.k)
        info.update(method=emb.method, m=args.m,
                    compression_ratio=emb.compression_ratio)
        lam, coords = emb.eigenvalues, emb.coordinates
        if op == "diffusion":
            lam, coords = lam ** args.t, coords * lam ** args.t
            info["t"] = args.t
        return lam, coords, info
    if op == "laplacian":
        emb = unified_spectral(g, "bpf", k=args.k, seed=args.seed)
    elif op == "modularity":
        emb = unified_spectral(g, "characteristic", k=args.k, seed=args.seed)
    elif op == "diffusion":
        if args.t < 0:
            raise UsageError("--t must be >= 0")
        dc = diffusion_map(g, args.t, args.k)
        info["t"] = args.t
        return dc.eigenvalues ** args.t, dc.coords, info
    elif op in ("type1", "type2"):
        tau = resolve_tau(args.tau, g.n, g.volume, g.degrees)
        if math.isinf(tau.value):
            raise GraphDataError("regular graph: the stein flattening constant "
                                 "is infinite, choose another --tau")
        emb = unified_spectral(g, "bpf", smoothing=tau, regularization=op,
                               k=args.k, seed=args.seed)
        info.update(tau=tau.value, tau_kind=tau.kind)
    else:
        raise UsageError("use the pagerank command for --operator pagerank")
    info["method"] = emb.method
    return emb.eigenvalues, emb.coordinates, info


def cmd_embed(args, figures=False):
    if args.operator == "pagerank":
        return cmd_pagerank(args)
    g = io.parse_edgelist(args.input)
    lam, coords, info = _embedding(g, args)
    out = io.ensure_dir(args.out)
    io.write_embedding(out / "embedding.csv", coords)
    io.write_spectrum(out / "spectrum.csv", lam)
    if figures:
        info["eigenvalues"] = [float(x) for x in lam]
        io.write_json(out / "report.json", info)
        if coords.shape[1]:
            plotting.plot_trace(out / "plot.svg", coords[:, 0],
                                title=f"{info['operator']} coordinate 1")
        plotting.plot_spectrum(out / "spectrum.svg", lam)
    print(f"{info['operator']}: n={g.n}, {lam.size} eigenvalues -> {out}")
    return 0


def cmd_changepoint(args):
    if args.simulate == (args.input is not None):
        raise UsageError("give exactly one of INPUT or --simulate")
    if args.simulate:
        z = planted_event_matrix(200, 20, (100,), seed=args.seed)
    else:
        z = io.parse_event_matrix(args.input)
    report = detect_changepoints(z, m=args.m, k=args.k)
    out = io.ensure_dir(args.out)
    payload = report.to_dict()
    payload.update(seed=args.seed, source="simulated" if args.simulate else str(args.input))
    if z.timestamps is not None:
        payload["boundary_timestamps"] = [z.timestamps[b - 1] for b in report.boundaries]
    if args.simulate:
        io.write_event_matrix(z, out / "events.csv")
    io.write_json(out / "report.json", payload)
    io.write_embedding(out / "embedding.csv", report.phi)
    io.write_spectrum(out / "spectrum.csv", report.eigenvalues)
    plotting.plot_trace(out / "plot.svg", report.phi1, report.boundaries,
                        title=f"LP(m={args.m}) coordinate 1")
    plotting.plot_spectrum(out / "spectrum.svg", report.eigenvalues)
    flag = " (unstable)" if report.unstable else ""
    print(f"boundaries: {report.boundaries}{flag} -> {out}")
    return 0


def cmd_compare(args):
    g = io.parse_edgelist(args.input)
    dev = engine_identities(g, tau=args.tau, t=args.t, alpha=args.alpha)
    width = max(map(len, dev))
    for name, value in dev.items():
        print(f"{name:<{width}}  {value:.3e}")
    out = io.ensure_dir(args.out)
    io.write_json(out / "compare.json", dev)
    return 0


def cmd_pagerank(args):
    g = io.parse_edgelist(args.input)
    dist = pagerank_scores(g, args.alpha)
    out = io.ensure_dir(args.out)
    io.write_scores(out / "pagerank.csv", dist.probs, name="pagerank")
    top = np.argsort(-dist.probs, kind="stable")[:5] + 1
    print(f"pagerank alpha={args.alpha:g}: top vertices {top.tolist()} -> {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.simplefilter("default")
    try:
        if args.command == "analyze":
            return cmd_embed(args, figures=True)
        if args.command == "embed":
            return cmd_embed(args)
        if args.command == "changepoint":
            return cmd_changepoint(args)
        if args.command == "compare":
            return cmd_compare(args)
        return cmd_pagerank(args)
    except UsageError as exc:
        print(f"grafield: error: {exc}", file=sys.stderr)
        return 1
    except (GraphDataError, ConvergenceError) as exc:
        print(f"grafield: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"grafield: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
