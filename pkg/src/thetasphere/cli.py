"""Command-line interface.

    thetasphere compute   --graph g.gr [--invariant t --variant ball] [--json]
    thetasphere represent --graph g.gr [--kind hypersphere]
    thetasphere verify    --graph g.gr
    thetasphere ellipsoid --graph g.gr --shape A.txt [--p inf] [--restarts 20]
    thetasphere report    [--graph a.gr --graph b.gr ...]

Exit codes: 0 success, 1 invalid arguments, 2 unreadable or malformed
input, 3 solver failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .ellipsoid import classify_tw, ep_local, tW
from .errors import GraphParseError, GraphValidationError, SolverError
from .graph import Graph, complement, generate, read_graph
from .invariants import compute_report, gijswijt_check, vector_chromatic
from .programs import T_VARIANTS, THETA_VARIANTS, t_invariant, theta, theta_bar
from .representations import (
    coloring_from_sphere,
    hypersphere_rep,
    obtuse_rep_from_tprime,
    orth_rep_optimal,
    ortho_from_sphere,
    verify_representation,
)

EXIT_ARGS, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 1, 2, 3, 4

INVARIANTS = ("t", "theta", "theta_bar", "chi_vector", "chi_strict", "chi_strong")
KINDS = ("hypersphere", "orthonormal", "obtuse", "coloring", "orth_optimal")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _tol(text):
    v = float(text)
    if not 1e-10 <= v <= 1e-4:
        raise argparse.ArgumentTypeError("tolerance must lie in [1e-10, 1e-4]")
    return v


def _p(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    v = float(text)
    if v < 1:
        raise argparse.ArgumentTypeError("p must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", action="append", help="graph file (p/e/n lines)")
    common.add_argument("--tol", type=_tol, default=1e-8)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--weights", help="sidecar file with one weight per node")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=20)

    ap = _Parser(prog="thetasphere", description="Hypersphere numbers, theta variants and ellipsoidal unit-distance numbers.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", parents=[common], help="invariant values and identity residuals")
    c.add_argument("--invariant", choices=INVARIANTS)
    c.add_argument("--variant", help="t or theta variant")

    r = sub.add_parser("represent", parents=[common], help="write a representation as JSON")
    r.add_argument("--kind", choices=KINDS, default="hypersphere")
    r.add_argument("--out", help="output path (default stdout)")

    sub.add_parser("verify", parents=[common], help="run the identity suite, exit 4 on failure")

    e = sub.add_parser("ellipsoid", parents=[common], help="t_W and the local E_p search")
    e.add_argument("--shape", required=True, help="sidecar file with the rows of A")
    e.add_argument("--p", type=_p, default=math.inf)

    sub.add_parser("report", parents=[common], help="identity suite over a corpus")
    return ap


# ------------------------------------------------------------------- loading


def _load_graph(path) -> Graph:
    try:
        return read_graph(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (GraphParseError, GraphValidationError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_matrix(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [line.split() for line in fh if line.strip() and not line.lstrip().startswith("#")]
        M = np.array([[float(v) for v in row] for row in rows])
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"{path}: matrix must be square")
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise InputError(f"{path}: matrix is not symmetric")
    return M


def _load_weights(path, n) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            w = np.array([float(v) for v in fh.read().split()])
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if w.shape != (n,) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError(f"{path}: need {n} finite nonnegative weights")
    return w


def _single_graph(args) -> tuple[str, Graph]:
    if not args.graph or len(args.graph) != 1:
        raise argparse.ArgumentTypeError("exactly one --graph is required")
    return args.graph[0], _load_graph(args.graph[0])


def _emit(obj, as_json, out=None):
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
        return
    for section in ("invariants", "residuals"):
        if section in obj:
            out.write(f"[{section}]\n")
            for k in sorted(obj[section]):
                out.write(f"  {k:<20} {obj[section][k]!r}\n")
    for k in sorted(set(obj) - {"invariants", "residuals"}):
        out.write(f"{k}: {json.dumps(obj[k], sort_keys=True)}\n")


# ------------------------------------------------------------------- verbs


def cmd_compute(args) -> int:
    name, G = _single_graph(args)
    w = _load_weights(args.weights, G.n) if args.weights else None
    if args.invariant is None:
        if args.variant:
            raise argparse.ArgumentTypeError("--variant needs --invariant")
        rep = compute_report(G, name, args.tol, w=w)
        _emit(rep.to_dict(), args.json)
        return 0
    inv, variant = args.invariant, args.variant
    vals, gap, iters = {}, 0.0, 0
    if inv == "t":
        variant = variant or "sphere"
        if variant not in T_VARIANTS:
            raise argparse.ArgumentTypeError(f"t variant must be one of {T_VARIANTS}")
        res = t_invariant(G, variant, w=w, tol=args.tol)
        vals["t" if variant == "sphere" else f"t_{variant}"] = res.value
        sol = res.solution
    elif inv in ("theta", "theta_bar"):
        variant = variant or ("weighted" if w is not None else "plain")
        if variant not in THETA_VARIANTS:
            raise argparse.ArgumentTypeError(f"theta variant must be one of {THETA_VARIANTS}")
        res = (theta if inv == "theta" else theta_bar)(G, variant, w=w, tol=args.tol)
        vals[inv if variant == "plain" else f"{inv}_{variant}"] = res.value
        sol = res.solution
    else:
        kind = inv.split("_", 1)[1]
        vals[inv] = vector_chromatic(G, kind, tol=args.tol)
        sol = None
    if sol is not None:
        gap, iters = sol.gap, sol.iterations
    _emit({"graph": name, "invariants": vals, "residuals": {}, "solver": {"gap": gap, "iters": iters}}, args.json)
    return 0


def _representation(G, kind, tol):
    if kind == "hypersphere":
        return hypersphere_rep(G, tol), {}
    if kind == "orthonormal":
        return ortho_from_sphere(hypersphere_rep(G, tol)), {}
    if kind == "coloring":
        return coloring_from_sphere(hypersphere_rep(G, tol)), {}
    if kind == "obtuse":
        rep, c = obtuse_rep_from_tprime(G, tol)
        return rep, {"c": c.tolist()}
    rep, c = orth_rep_optimal(G, tol)
    return rep, {"c": c.tolist()}


def cmd_represent(args) -> int:
    name, G = _single_graph(args)
    rep, extra = _representation(G, args.kind, args.tol)
    target = complement(G) if rep.metadata.get("of") == "complement" else G
    out = rep.to_dict()
    out["graph"] = name
    out["metadata"].update(extra)
    out["residuals"] = verify_representation(target, rep, 1e-7).as_dict()
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _verify_graph(G, name, tol, w=None):
    rep = compute_report(G, name, tol, w=w)
    result = rep.to_dict()
    failures = rep.failures()
    if G.m:
        hs = hypersphere_rep(G, tol)
        r = verify_representation(G, hs, 1e-7)
        result["residuals"]["hypersphere_rep"] = max(r.edge_residual, r.norm_residual)
        q = ortho_from_sphere(hs)
        gallai = float(np.max(np.abs(q.points[:, 0] ** 2 - (1 - 2 * rep.invariants["t"]))))
        result["residuals"]["gallai"] = gallai
        if not r.ok:
            failures.append("hypersphere_rep")
        if gallai > 1e-6:
            failures.append("gallai")
    result["failures"] = sorted(failures)
    return result, failures


def cmd_verify(args) -> int:
    name, G = _single_graph(args)
    w = _load_weights(args.weights, G.n) if args.weights else None
    result, failures = _verify_graph(G, name, args.tol, w)
    _emit(result, args.json)
    return EXIT_VERIFY if failures else 0


def cmd_ellipsoid(args) -> int:
    name, G = _single_graph(args)
    A = _load_matrix(args.shape)
    out = {"graph": name}
    if A.shape[0] == G.n:
        cls = classify_tw(A)
        r = tW(G, A, tol=args.tol)
        out["tW"] = {"classification": cls, "value": r.value if math.isfinite(r.value) else "-inf"}
    res = ep_local(G, A, args.p, restarts=args.restarts, tol=args.tol, seed=args.seed)
    out["ep_local"] = res.to_dict()
    _emit(out, args.json)
    return 0


def default_corpus() -> list[tuple[str, Graph]]:
    corpus = [(f"K{n}", generate("complete", n)) for n in range(2, 7)]
    corpus += [(f"C{n}", generate("cycle", n)) for n in range(4, 10)]
    corpus += [("petersen", generate("petersen")), ("moser_spindle", generate("moser_spindle"))]
    return corpus


def cmd_report(args) -> int:
    corpus = [(p, _load_graph(p)) for p in args.graph] if args.graph else default_corpus()
    rows, bad = [], 0
    for name, G in corpus:
        result, failures = _verify_graph(G, name, args.tol)
        bad += bool(failures)
        rows.append(result)
    if args.json:
        sys.stdout.write(json.dumps({"graphs": rows, "failed": bad}, sort_keys=True, indent=2) + "\n")
    else:
        for r in rows:
            worst = max((abs(v) for k, v in r["residuals"].items() if k != "tplus_thetaplus"), default=0.0)
            status = "ok" if not r["failures"] else "FAIL " + ",".join(r["failures"])
            sys.stdout.write(f"{r['graph']:<16} t={r['invariants']['t']:.9f} theta_bar={r['invariants']['theta_bar']:.9f} worst={worst:.1e} {status}\n")
    return EXIT_VERIFY if bad else 0


COMMANDS = {
    "compute": cmd_compute,
    "represent": cmd_represent,
    "verify": cmd_verify,
    "ellipsoid": cmd_ellipsoid,
    "report": cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args)
    except argparse.ArgumentTypeError as exc:
        sys.stderr.write(f"thetasphere: error: {exc}\n")
        return EXIT_ARGS
    except InputError as exc:
        sys.stderr.write(f"thetasphere: {exc}\n")
        return EXIT_INPUT
    except SolverError as exc:
        sys.stderr.write(f"thetasphere: solver failure: {exc}\n")
        return EXIT_SOLVER
    except ValueError as exc:
        sys.stderr.write(f"thetasphere: error: {exc}\n")
        return EXIT_ARGS


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
