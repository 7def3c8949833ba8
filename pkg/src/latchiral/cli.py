"""Command-line interface: ``latchiral <command> ...``.

Exit codes: 0 success, 1 usage or input error, 2 computation budget
exhausted (or verdict undecided), 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .chirality import (ChiralityError, ChiralityVerdict, achirality_certificate, chirality_proof,
                        symmetry_group_report)
from .coxeter import GraphError, build_graph, emit_dot
from .discriminant import DiscriminantError, class_invariants, discriminant_group
from .expr import ExprError, build_lattice
from .lattice import LatticeError, signature
from .roots import RootConfig, RootError, default_base_point, run_vinberg

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _dump(obj) -> None:
    print(json.dumps(obj, indent=1))


def _progress(args):
    if not args.progress:
        return None

    def report(level, found):
        print(f"level {level}: {found} root(s)", file=sys.stderr, flush=True)

    return report


def _config(L, args) -> RootConfig:
    squares = tuple(int(x) for x in args.squares.split(","))
    if args.point:
        p = tuple(int(x) for x in args.point.split(","))
    else:
        p = default_base_point(L)
    return RootConfig(p, squares, Fraction(args.max_level), args.max_roots)


def _run(L, args):
    return run_vinberg(L, _config(L, args), _progress(args))


def cmd_info(args) -> int:
    L = build_lattice(args.expr)
    plus, minus = signature(L)
    out = {"lattice": L.name, "rank": L.rank, "signature": [plus, minus], "det": L.det,
           "gram": [list(r) for r in L.gram], "discriminant": discriminant_group(L).to_json()}
    try:
        inv = class_invariants(L)
        out["invariants"] = {"rho": inv.rho, "d": inv.d, "parity": inv.parity}
    except DiscriminantError as exc:
        out["invariants"] = None
        out["note"] = str(exc)
    _dump(out)
    return EXIT_OK


def cmd_vinberg(args) -> int:
    L = build_lattice(args.expr)
    seq = _run(L, args)
    out = seq.to_json()
    out["levels_scanned"] = [str(x) for x in seq.levels_scanned]
    _dump(out)
    return EXIT_OK if seq.status == "complete" else EXIT_BUDGET


def cmd_graph(args) -> int:
    L = build_lattice(args.expr)
    seq = _run(L, args)
    G = build_graph(L, seq.vectors, [r.name for r in seq.roots])
    if args.format == "dot":
        print(emit_dot(G))
    else:
        _dump({"status": seq.status, **G.to_json()})
    return EXIT_OK if seq.status == "complete" else EXIT_BUDGET


def cmd_volume(args) -> int:
    L = build_lattice(args.expr)
    seq = _run(L, args)
    rep = seq.volume_report
    _dump({"status": seq.status, "roots": len(seq.roots), "report": rep.to_json() if rep else None})
    return EXIT_OK if seq.status == "complete" else EXIT_BUDGET


def cmd_symmetries(args) -> int:
    L = build_lattice(args.expr)
    seq = _run(L, args)
    G, rows = symmetry_group_report(L, seq)
    names = [r.name for r in seq.roots]
    out = []
    for perm, g, d in rows:
        moved = {names[i]: names[j] for i, j in enumerate(perm) if i != j}
        out.append({"moves": moved, "automorphism": g.to_json() if g else None, "delta3": d})
    _dump({"status": seq.status, "roots": names, "symmetries": out})
    return EXIT_OK if seq.status == "complete" else EXIT_BUDGET


def _direct_verdict(L, args) -> ChiralityVerdict:
    seq = _run(L, args)
    G, rows = symmetry_group_report(L, seq)
    for perm, g, d in rows:
        if d == -1:
            try:
                c = achirality_certificate(L, seq.vectors, perm, [r.name for r in seq.roots], seq.config, L.name)
            except ChiralityError:
                continue
            return ChiralityVerdict("achiral", [c], "graph symmetry reverses the 3-part")
    if seq.status == "complete" and 4 not in seq.config.allowed_squares:
        return ChiralityVerdict("chiral", [chirality_proof(L, seq, L.name)], "complete wall system")
    return ChiralityVerdict("unknown", [], f"root search ended with status {seq.status}")


def cmd_chirality(args) -> int:
    from .tables import decide, identify

    L = build_lattice(args.expr)
    entry = identify(args.expr)
    if entry is not None and not args.direct:
        target, steps = decide(args.expr)
        verdict = ChiralityVerdict(target.status, [target.certificate] if target.certificate else [],
                                   target.reason or target.method)
        extra = {"class": target.to_json(), "steps": [str(s) for s in steps]}
    else:
        verdict = _direct_verdict(L, args)
        extra = {}
    out = {"lattice": L.name, **verdict.to_json(), **extra}
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(out, fh, indent=1)
        print(json.dumps({"lattice": L.name, "status": verdict.status, "reason": verdict.reason,
                          "certificate": args.output}, indent=1))
    else:
        _dump(out)
    if verdict.status != "unknown" and verdict.certificates:
        from .verify import VerificationError, verify_certificate

        try:
            verify_certificate(verdict.certificates[0])
        except VerificationError as exc:
            print(f"verification failed: {exc}", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_OK if verdict.status != "unknown" else EXIT_BUDGET


def cmd_verify(args) -> int:
    from .verify import VerificationError, verify_file

    try:
        claim = verify_file(args.certificate, rerun=not args.no_rerun)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read certificate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as exc:
        print(f"REJECTED: {exc}")
        return EXIT_VERIFY
    print(f"OK: {claim}")
    return EXIT_OK


def cmd_tables(args) -> int:
    from .tables import emit_table1, generate_tables, run_classification, summary

    if args.emit == "table1" or args.run:
        def progress(msg):
            if args.progress:
                print(msg, file=sys.stderr, flush=True)

        result = run_classification(verify=not args.no_verify, progress=progress)
        entries = result.entries
    else:
        result, entries = None, generate_tables()
    if args.emit == "table1":
        print(emit_table1(entries, args.format))
        if args.format != "json":
            print(summary(result))
        return EXIT_OK if result.counts()["unknown"] == 0 else EXIT_BUDGET
    shown = [e for e in entries if args.parity in ("all", e.parity)]
    if args.format == "json":
        _dump([e.to_json() for e in shown])
    else:
        for e in shown:
            aka = f" (= {', '.join(e.aliases)})" if e.aliases else ""
            status = e.status if result is not None else "-"
            print(f"{e.rho:>3} {e.d:>3} {e.parity:<5} {status:<8} {e.expr}{aka}")
        if result is not None:
            print(summary(result))
    if result is not None and result.counts()["unknown"]:
        return EXIT_BUDGET
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="latchiral", description="Reflection groups and chirality of even hyperbolic lattices.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def lattice_cmd(name, help_, fn, search=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("expr", help="lattice expression, e.g. 'U(2)+A2+2E8'")
        if search:
            p.add_argument("--squares", default="2,6", choices=["2,6", "2,4,6"],
                           help="allowed root squares: 2,6 (default) or 2,4,6 (extended)")
            p.add_argument("--max-level", default="200", help="largest level to scan (rational)")
            p.add_argument("--max-roots", type=int, default=200)
            p.add_argument("--point", help="base point coordinates, comma separated")
            p.add_argument("--progress", action="store_true", help="report levels on stderr")
        p.set_defaults(func=fn)
        return p

    lattice_cmd("info", "invariants and discriminant form", cmd_info, search=False)
    lattice_cmd("vinberg", "root sequence as JSON", cmd_vinberg)
    g = lattice_cmd("graph", "Coxeter graph of the root sequence", cmd_graph)
    g.add_argument("--format", choices=["dot", "json"], default="dot")
    lattice_cmd("volume", "finite-volume witness report", cmd_volume)
    lattice_cmd("symmetries", "graph symmetries and their action on the 3-part", cmd_symmetries)
    c = lattice_cmd("chirality", "verdict with certificate", cmd_chirality)
    c.add_argument("-o", "--output", help="write verdict and certificate to this file")
    c.add_argument("--direct", action="store_true", help="skip the derivation script; use the wall system only")

    v = sub.add_parser("verify", help="re-check a certificate file")
    v.add_argument("certificate")
    v.add_argument("--no-rerun", action="store_true", help="do not repeat root searches")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tables", help="class tables and the (rho, d) grid")
    t.add_argument("--parity", choices=["even", "odd", "all"], default="all")
    t.add_argument("--emit", choices=["table1"])
    t.add_argument("--run", action="store_true", help="run the classification before listing")
    t.add_argument("--format", choices=["text", "markdown", "json"], default="text")
    t.add_argument("--no-verify", action="store_true")
    t.add_argument("--progress", action="store_true")
    t.set_defaults(func=cmd_tables)
    return ap


_NEGATED_BLOCK = re.compile(r"^-(U|[ADE]\d|<)")


def _protect(argv: List[str]) -> List[str]:
    # "-A1+<6>" would look like an option; the Unicode minus parses the same
    return ["\u2212" + a[1:] if _NEGATED_BLOCK.match(a) else a for a in argv]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(_protect(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.func(args)
    except (ExprError, LatticeError, RootError, GraphError, DiscriminantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
