"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
and input errors (message on stderr). Reports are JSON (sorted keys) or a
flattened two-column CSV, written to stdout and optionally to --report.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import apartment, geometry, harmonic, indefinite, spectra
from .errors import LabError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GEOMETRY_KINDS = {
    "pg": geometry.SL3_LINK,
    "gq": geometry.SP4_SPECIAL_LINK,
    "bipartite": geometry.SP4_NONSPECIAL_LINK,
}
GAP_KINDS = {
    "sl3": geometry.SL3_LINK,
    "sp4-special": geometry.SP4_SPECIAL_LINK,
    "sp4-nonspecial": geometry.SP4_NONSPECIAL_LINK,
    **GEOMETRY_KINDS,
}


class UsageError(Exception):
    pass


# -- output ----------------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, "" if v is None else repr(v) if isinstance(v, float) else v])
        return buf.getvalue()
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _emit(args, report: dict) -> None:
    text = render(report, args.format)
    sys.stdout.write(text)
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            fh.write(text)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _distinct_paths(*paths):
    real = [os.path.realpath(p) for p in paths if p]
    if len(set(real)) != len(real):
        raise UsageError("input and output paths must be distinct")


def _positive(name, value):
    if value is not None and not value > 0:
        raise UsageError(f"--{name} must be positive")


# -- subcommands -------------------------------------------------------------------

def cmd_geometry(args) -> int:
    _distinct_paths(args.out)
    g = geometry.link_graph(GEOMETRY_KINDS[args.kind], args.q)
    v = geometry.validate_generalized_polygon(g)
    text = json.dumps(g.to_dict(), sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        _emit(args, {"kind": g.kind, "q": g.q, "out": args.out, "validation": v.to_dict()})
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK if v.passed else EXIT_FAIL


def cmd_spectrum(args) -> int:
    _positive("tol", args.tol)
    _distinct_paths(args.graph, args.report)
    g = geometry.LinkGraph.from_dict(_read_json(args.graph))
    rep = spectra.spectral_gap(g, backend=args.backend)
    out = rep.to_dict()
    out["distinct_eigenvalues"] = spectra.distinct_values(rep.eigenvalues, 1e-6)
    out["tol"] = args.tol
    ok = rep.residual is None or rep.residual <= args.tol
    out["passed"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gap(args) -> int:
    kind = GAP_KINDS[args.kind]
    g = geometry.link_graph(kind, args.q)
    rep = spectra.spectral_gap(g, backend=args.backend)
    out = {
        "kind": kind,
        "q": args.q,
        "lambda1": rep.lambda1,
        "expected": rep.expected,
        "residual": rep.residual,
        "margin": None,
        "margin_sign": None,
        "warning": None,
    }
    if kind != geometry.SP4_NONSPECIAL_LINK and args.q >= 2:
        m = spectra.rigidity_margin(kind, args.q)
        out["margin"] = m.margin
        out["margin_sign"] = m.sign
        if m.threshold:
            out["warning"] = "threshold: margin is exactly zero"
        elif m.sign < 0:
            out["warning"] = "margin is negative"
    ok = rep.residual <= args.tol
    out["passed"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_harmonic(args) -> int:
    _positive("tol", args.tol)
    _positive("radius", args.radius)
    if args.init is None and args.seed is None:
        raise UsageError("a random initial map needs --seed (or give --init)")
    _distinct_paths(args.complex, args.init, args.report)
    try:
        c = harmonic.load_complex(_read_json(args.complex))
        if args.init:
            f0 = harmonic.load_map(c.space, _read_json(args.init), c.n_vertices)
        else:
            f0 = harmonic.random_map(c, np.random.default_rng(args.seed))
    except LabError as exc:
        raise UsageError(str(exc)) from exc
    res = harmonic.harmonic_descent(
        c, f0, max_iter=args.max_iter, tol=args.tol, radius=args.radius, jacobi=args.jacobi
    )
    out = res.to_dict()
    out["seed"] = args.seed
    ok = res.status == harmonic.CONVERGED and res.monotone
    out["passed"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_chain(args) -> int:
    _distinct_paths(args.complex, args.map, args.lambda_table, args.report)
    try:
        c = harmonic.load_complex(_read_json(args.complex))
        f = harmonic.load_map(c.space, _read_json(args.map), c.n_vertices)
    except LabError as exc:
        raise UsageError(str(exc)) from exc
    table = _read_json(args.lambda_table)
    if not isinstance(table, dict):
        raise UsageError("lambda table must map vertex class to a number")
    rep = harmonic.wang_chain_report(c, f, {k: float(v) for k, v in table.items()})
    out = rep.to_dict()
    _emit(args, out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_parabolic(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    rep = indefinite.run_trials(args.field.upper(), args.q, args.p, args.n3, args.trials, args.seed)
    failed = indefinite.trial_failures(rep)
    rep["limits"] = dict(indefinite.TRIAL_LIMITS)
    rep["failed"] = failed
    rep["passed"] = not failed
    _emit(args, rep)
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_apartment(args) -> int:
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    rep = apartment.apartment_report(args.p, args.samples, args.seed)
    cover = apartment.cover_check(args.p, min(args.samples, 2000), args.seed)
    out = rep.to_dict()
    out["cover"] = {"samples": cover.samples, "covered": cover.covered, "unique": cover.unique}
    ok = rep.passed and cover.passed
    out["passed"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="buildinglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geometry", parents=[common], help="write a link graph as JSON")
    p.add_argument("--kind", choices=sorted(GEOMETRY_KINDS), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("spectrum", parents=[common], help="spectral gap of a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    p.add_argument("--report")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gap", parents=[common], help="gap and rigidity margin of a standard link")
    p.add_argument("--kind", choices=sorted(GAP_KINDS), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    p.add_argument("--report")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("harmonic", parents=[common], help="harmonic descent on a voltage complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--init")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--radius", type=float, default=harmonic.DEFAULT_RADIUS)
    p.add_argument("--jacobi", action="store_true", help="simultaneous instead of Gauss-Seidel updates")
    p.add_argument("--report")
    p.set_defaults(func=cmd_harmonic)

    p = sub.add_parser("chain", parents=[common], help="link inequalities for a map")
    p.add_argument("--complex", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--lambda-table", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("parabolic", parents=[common], help="random checks of the parabolic block algebra")
    p.add_argument("--field", type=str.lower, choices=("r", "c", "h"), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n3", type=int, default=8)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_parabolic)

    p = sub.add_parser("apartment", parents=[common], help="diameter bound on the subdivided sphere")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_apartment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, LabError, ValueError, OSError) as exc:
        print(f"buildinglab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
