"""The 75 coarse classes, the derivation script that decides their
chirality, and the combined ``(rho, d)`` grid.

The script is a plain text file shipped with the package
(``data/derivation.txt``).  Each non-comment line reads::

    step <kind> lattice=<expr> [key=value ...]

with kinds ``chirality_complete``, ``extended_group``,
``achirality_symmetry``, ``rootless``, ``extension`` and ``reduction``.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .chirality import (Certificate, ChiralityError, ChiralityVerdict, achirality_certificate, block_negation,
                        chirality_proof, extended_group_chirality, extension_step, induced_map, delta3,
                        reduction_step, rootless_certificate, sheet_preserving, spans_lattice)
from .coxeter import build_graph, graph_symmetries
from .discriminant import class_invariants
from .expr import build_lattice, parse_lattice_expr
from .roots import RootConfig, default_base_point, run_vinberg

log = logging.getLogger(__name__)


def canonical(expr: str) -> str:
    return str(parse_lattice_expr(expr))


# (rho, d, expression, aliases) of the even classes
EVEN_CLASSES: List[Tuple[int, int, str, Tuple[str, ...]]] = [
    (4, 0, "U+A2", ()),
    (12, 0, "U+A2+E8", ()),
    (20, 0, "U+A2+2E8", ()),
    (4, 2, "U(2)+A2", ()),
    (8, 2, "U+A2+D4", ()),
    (12, 2, "U(2)+A2+E8", ()),
    (16, 2, "U+A2+D4+E8", ()),
    (20, 2, "U(2)+A2+2E8", ()),
    (8, 4, "U(2)+A2+D4", ()),
    (12, 4, "U+A2+2D4", ()),
    (16, 4, "U(2)+A2+D4+E8", ()),
    (8, 6, "U+E6(2)", ()),
    (12, 6, "U(2)+A2+2D4", ()),
    (8, 8, "U(2)+E6(2)", ()),
    (12, 8, "U+A2+E8(2)", ("U+E6(2)+D4",)),
    (12, 10, "U(2)+A2+E8(2)", ("U(2)+E6(2)+D4",)),
]

# odd series: prefix + t*A1 has rho = rho0 + t and d = d0 + t
ODD_SERIES: List[Tuple[str, int, int, int, int]] = [
    # prefix, rho0, d0, t_min, t_max
    ("-A1+<6>", 2, 2, 0, 9),
    ("-A1+A2", 3, 1, 0, 9),
    ("U+A2", 4, 0, 1, 9),
    ("U+A2+D4", 8, 2, 1, 6),
    ("-A1+<6>+E8", 10, 2, 0, 5),
    ("-A1+A2+E8", 11, 1, 0, 5),
    ("U+A2+E8", 12, 0, 1, 5),
    ("U+A2+D4+E8", 16, 2, 1, 2),
    ("-A1+<6>+2E8", 18, 2, 0, 1),
    ("-A1+A2+2E8", 19, 1, 0, 1),
    ("U+A2+2E8", 20, 0, 1, 1),
]


def series_expr(prefix: str, t: int) -> str:
    if t == 0:
        return prefix
    return prefix + ("+A1" if t == 1 else f"+{t}A1")


@dataclass
class ClassEntry:
    """One coarse deformation class."""

    expr: str
    rho: int
    d: int
    parity: str
    aliases: Tuple[str, ...] = ()
    status: str = "unknown"
    method: str = ""
    certificate: Optional[Certificate] = None
    reason: str = ""

    @property
    def key(self) -> Tuple[int, int, str]:
        return (self.rho, self.d, self.parity)

    def to_json(self, with_certificate=False) -> Dict:
        out = {"lattice": self.expr, "aliases": list(self.aliases), "rho": self.rho, "d": self.d,
               "parity": self.parity, "status": self.status, "method": self.method}
        if self.reason:
            out["reason"] = self.reason
        if with_certificate and self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


class TableError(Exception):
    pass


def generate_tables() -> List[ClassEntry]:
    """All 75 classes, with invariants recomputed from the lattices.

    Raises ``TableError`` if a listed lattice has other invariants than
    its table coordinates, or two entries share invariants.
    """
    entries: List[ClassEntry] = []
    for rho, d, expr, aliases in EVEN_CLASSES:
        entries.append(ClassEntry(canonical(expr), rho, d, "even", tuple(canonical(a) for a in aliases)))
    for prefix, rho0, d0, t0, t1 in ODD_SERIES:
        for t in range(t0, t1 + 1):
            entries.append(ClassEntry(canonical(series_expr(prefix, t)), rho0 + t, d0 + t, "odd"))
    seen = {}
    for e in entries:
        for x in (e.expr,) + e.aliases:
            inv = class_invariants(build_lattice(x)).as_tuple()
            if inv != e.key:
                raise TableError(f"{x} has invariants {inv}, table says {e.key}")
        if e.key in seen:
            raise TableError(f"{e.expr} and {seen[e.key]} share invariants {e.key}")
        seen[e.key] = e.expr
    return entries


# ---------------------------------------------------------------------------
# Derivation script


@dataclass
class Step:
    kind: str
    lattice: str
    params: Dict[str, str]
    line: int

    def __str__(self):
        extra = " ".join(f"{k}={v}" for k, v in self.params.items())
        return f"step {self.kind} lattice={self.lattice}" + (f" {extra}" if extra else "")


STEP_KINDS = ("chirality_complete", "extended_group", "achirality_symmetry", "rootless", "extension", "reduction")


def parse_script(text: str) -> List[Step]:
    steps = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] != "step" or len(words) < 3:
            raise TableError(f"line {no}: expected 'step <kind> lattice=<expr> ...'")
        kind = words[1]
        if kind not in STEP_KINDS:
            raise TableError(f"line {no}: unknown step kind {kind!r}")
        params = {}
        for w in words[2:]:
            if "=" not in w:
                raise TableError(f"line {no}: parameter {w!r} is not key=value")
            k, v = w.split("=", 1)
            params[k] = v
        if "lattice" not in params:
            raise TableError(f"line {no}: missing lattice=")
        steps.append(Step(kind, canonical(params.pop("lattice")), params, no))
    return steps


def default_script() -> str:
    return resources.files("latchiral").joinpath("data/derivation.txt").read_text()


def _names(v: str) -> List[str]:
    return [x for x in v.split(",") if x]


class _Runner:
    def __init__(self):
        self.runs: Dict = {}
        self.certs: Dict[str, Certificate] = {}

    def vinberg(self, expr: str, params: Dict[str, str], squares=(2, 6)) -> Tuple:
        L = build_lattice(expr)
        src = params.get("model", expr)
        M = build_lattice(src) if src != expr else L
        cfg = RootConfig(default_base_point(M), squares, Fraction(params.get("max_level", "200")),
                         int(params.get("max_roots", "200")))
        key = (canonical(src), cfg)
        if key not in self.runs:
            self.runs[key] = run_vinberg(M, cfg)
        return M, self.runs[key]

    def premise(self, expr: str) -> Certificate:
        c = self.certs.get(canonical(expr))
        if c is None:
            raise ChiralityError(f"premise {expr} has no certificate yet")
        return c

    # -- step kinds ------------------------------------------------------

    def chirality_complete(self, s: Step) -> Certificate:
        L, seq = self.vinberg(s.lattice, s.params)
        return chirality_proof(L, seq, s.lattice)

    def extended_group(self, s: Step) -> Certificate:
        M, seq = self.vinberg(s.lattice, s.params, (2, 4, 6))
        cert = extended_group_chirality(M, seq.config, s.lattice, seq)
        if "model" in s.params:
            cert.data["model"] = canonical(s.params["model"])
        return cert

    def achirality_symmetry(self, s: Step) -> Certificate:
        L, seq = self.vinberg(s.lattice, s.params)
        names = [r.name for r in seq.roots]
        drop = set(_names(s.params.get("exclude", "")))
        unknown = drop - set(names)
        if unknown:
            raise ChiralityError(f"no roots named {sorted(unknown)}")
        idx = [i for i, n in enumerate(names) if n not in drop]
        roots = [seq.roots[i].coords for i in idx]
        sub_names = [names[i] for i in idx]
        if not spans_lattice(L, roots):
            raise ChiralityError("selected walls do not span the lattice")
        want = []
        for pair in _names(s.params.get("map", "")):
            a, b = pair.split(":")
            want.append((sub_names.index(a), sub_names.index(b)))
        G = build_graph(L, roots, sub_names)
        p = seq.config.base_point
        for sym in graph_symmetries(G):
            if any(sym.perm[a] != b for a, b in want):
                continue
            g = induced_map(L, roots, sym.perm)
            if g is None or not sheet_preserving(L, g, p) or delta3(L, g) != -1:
                continue
            return achirality_certificate(L, roots, sym.perm, sub_names, seq.config, s.lattice)
        raise ChiralityError("no graph symmetry induces a Z/3-reversing chamber automorphism")

    def rootless(self, s: Step) -> Certificate:
        L = build_lattice(s.lattice)
        g = block_negation(L, [int(b) for b in _names(s.params["negate"])])
        return rootless_certificate(L, g, expr=s.lattice)

    def extension(self, s: Step) -> Certificate:
        base = self.premise(s.params["from"])
        add = s.params["add"]
        return extension_step(build_lattice(add), base, s.lattice, canonical(add))

    def reduction(self, s: Step) -> Certificate:
        base = self.premise(s.params["from"])
        names = base.data["names"]
        J = []
        for n in _names(s.params["J"]):
            if n not in names:
                raise ChiralityError(f"premise has no root named {n}")
            J.append(names.index(n))
        cert = reduction_step(base, J, s.lattice)
        have = tuple(cert.data["invariants"])
        want = class_invariants(build_lattice(s.lattice)).as_tuple()
        if have != want:
            raise ChiralityError(f"complement has invariants {have}, {s.lattice} has {want}")
        return cert


@dataclass
class ClassificationResult:
    entries: List[ClassEntry]
    steps: List[Step]
    timings: Dict[str, float] = field(default_factory=dict)
    verified: bool = False
    runs: Dict = field(default_factory=dict, repr=False)

    def counts(self) -> Dict[str, int]:
        out = {"chiral": 0, "achiral": 0, "unknown": 0}
        for e in self.entries:
            out[e.status] += 1
        return out

    def entry(self, expr: str) -> ClassEntry:
        c = canonical(expr)
        for e in self.entries:
            if e.expr == c or c in e.aliases:
                return e
        raise KeyError(expr)

    def verdict(self, expr: str) -> ChiralityVerdict:
        e = self.entry(expr)
        return ChiralityVerdict(e.status, [e.certificate] if e.certificate else [], e.reason or e.method)

    def to_json(self, with_certificates=False) -> Dict:
        return {"counts": self.counts(), "verified": self.verified,
                "classes": [e.to_json(with_certificates) for e in self.entries]}


def run_classification(script: Optional[str] = None, verify: bool = True,
                       progress: Optional[Callable[[str], None]] = None) -> ClassificationResult:
    """Execute the derivation script over the 75 classes.

    Every class must be decided by exactly one step.  Failed steps leave
    their class ``unknown`` with the reason; nothing is guessed.  With
    ``verify`` each certificate is re-checked by an independent pass.
    """
    entries = generate_tables()
    by_expr: Dict[str, ClassEntry] = {}
    for e in entries:
        for x in (e.expr,) + e.aliases:
            by_expr[x] = e
    steps = parse_script(default_script() if script is None else script)
    runner = _Runner()
    result = ClassificationResult(entries, steps, runs=runner.runs)
    decided = set()
    for s in steps:
        e = by_expr.get(s.lattice)
        if e is None:
            raise TableError(f"line {s.line}: {s.lattice} is not a class of the table")
        if e.expr in decided:
            raise TableError(f"line {s.line}: {e.expr} is decided twice")
        decided.add(e.expr)
        t0 = time.perf_counter()
        try:
            cert = getattr(runner, s.kind)(s)
        except (ChiralityError, ValueError, KeyError) as exc:
            e.status, e.reason, e.method = "unknown", f"{s.kind}: {exc}", s.kind
            log.warning("line %d %s: %s", s.line, s.lattice, exc)
        else:
            runner.certs[e.expr] = cert
            for a in e.aliases:
                runner.certs[a] = cert
            e.status, e.method, e.certificate = cert.claim, s.kind, cert
        result.timings[e.expr] = time.perf_counter() - t0
        if progress:
            progress(f"{e.expr:22s} {e.status:8s} {s.kind} ({result.timings[e.expr]:.2f} s)")
    missing = [e.expr for e in entries if e.expr not in decided]
    if missing:
        raise TableError(f"classes without a step: {missing}")
    _consistency(result)
    if verify:
        from .verify import Verifier, VerificationError

        v = Verifier(rerun=True)
        v._runs.update({(tuple(map(tuple, build_lattice(k[0]).gram)), k[1]): seq for k, seq in runner.runs.items()})
        for e in entries:
            if e.certificate is None:
                continue
            try:
                claim = v.verify(e.certificate)
            except VerificationError as exc:
                e.status, e.reason = "unknown", f"verification failed: {exc}"
                e.certificate = None
                continue
            if claim != e.status:
                e.status, e.reason = "unknown", "verifier disagrees with the stored claim"
        result.verified = True
    return result


def _consistency(result: ClassificationResult) -> None:
    """Cross-check monotonicity along the A1 series."""
    entries = {e.expr: e for e in result.entries}
    for prefix, rho0, d0, t0, t1 in ODD_SERIES:
        status = [entries[canonical(series_expr(prefix, t))].status for t in range(t0, t1 + 1)]
        seen_achiral = False
        for st in status:
            if st == "achiral":
                seen_achiral = True
            elif st == "chiral" and seen_achiral:
                raise TableError(f"series {prefix}+tA1 turns chiral after being achiral")


# ---------------------------------------------------------------------------
# The (rho, d) grid


def table_grid(entries: Sequence[ClassEntry]) -> Dict[Tuple[int, int], Dict[str, str]]:
    grid: Dict[Tuple[int, int], Dict[str, str]] = {}
    for e in entries:
        grid.setdefault((e.rho, e.d), {})[e.parity] = e.status
    return grid


_LETTER = {"chiral": "c", "achiral": "a", "unknown": "?"}


def cell_text(cell: Dict[str, str], bold=("**", "**")) -> str:
    odd = _LETTER[cell["odd"]] if "odd" in cell else ""
    even = bold[0] + _LETTER[cell["even"]] + bold[1] if "even" in cell else ""
    if odd and even:
        return f"{odd}({even})"
    return odd or even


def emit_table1(entries: Sequence[ClassEntry], fmt: str = "text") -> str:
    """Grid with ``d`` as rows (top to bottom) and ``rho`` as columns.

    Odd classes print as ``a``/``c``; even ones are bold in markdown and
    upper case in text; a pair prints as ``odd(even)``.
    """
    grid = table_grid(entries)
    if fmt == "json":
        return json.dumps([{"rho": r, "d": d, **cell} for (r, d), cell in sorted(grid.items())], indent=1)
    rhos = range(2, 23)
    ds = range(max(d for _, d in grid), -1, -1)
    if fmt == "markdown":
        lines = ["| d \\ rho | " + " | ".join(str(r) for r in rhos) + " |",
                 "|---" * (len(rhos) + 1) + "|"]
        for d in ds:
            cells = [cell_text(grid[(r, d)]) if (r, d) in grid else "" for r in rhos]
            lines.append(f"| {d} | " + " | ".join(cells) + " |")
        return "\n".join(lines)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")

    def txt(cell):
        s = cell_text(cell, ("", ""))
        if "even" in cell:
            e = _LETTER[cell["even"]]
            s = s[:-2] + e.upper() + ")" if "odd" in cell else e.upper()
        return s

    width = 5
    lines = []
    for d in ds:
        lines.append(f"{d:>3} |" + "".join(f"{txt(grid[(r, d)]) if (r, d) in grid else '':>{width}}" for r in rhos))
    lines.append("    +" + "-" * width * len(rhos))
    lines.append("     " + "".join(f"{r:>{width}}" for r in rhos))
    lines.append("rows: d, columns: rho; lower case odd, upper case even, odd(even) when both exist")
    return "\n".join(lines)


def pure_class_count(result: ClassificationResult) -> int:
    """Each chiral class splits into two mirror classes."""
    c = result.counts()
    if c["unknown"]:
        raise TableError("pure class count needs every class decided")
    return len(result.entries) + c["chiral"]


def summary(result: ClassificationResult) -> str:
    c = result.counts()
    n_cells = len(table_grid(result.entries))
    try:
        pure = f"{pure_class_count(result)} pure deformation classes"
    except TableError:
        pure = "pure class count undetermined"
    return (f"{len(result.entries)} classes: {c['chiral']} chiral, {c['achiral']} achiral, "
            f"{c['unknown']} unknown; {n_cells} occupied (rho, d) cells; "
            f"{pure}")


def identify(expr: str, entries: Optional[Sequence[ClassEntry]] = None) -> Optional[ClassEntry]:
    """Table class with the same ``(rho, d, parity)`` as ``expr``, if any."""
    from .discriminant import DiscriminantError

    try:
        key = class_invariants(build_lattice(expr)).as_tuple()
    except DiscriminantError:
        return None
    for e in entries if entries is not None else generate_tables():
        if e.key == key:
            return e
    return None


def decide(expr: str, script: Optional[str] = None, verify: bool = True) -> Tuple[ClassEntry, List[Step]]:
    """Decide one class by running only the steps it depends on."""
    entries = generate_tables()
    target = identify(expr, entries)
    if target is None:
        raise TableError(f"{expr} is not in the table family")
    steps = parse_script(default_script() if script is None else script)
    by_lattice = {s.lattice: s for s in steps}
    names = {x: e.expr for e in entries for x in (e.expr,) + e.aliases}
    needed: List[Step] = []

    def visit(x):
        s = by_lattice.get(names.get(x, x))
        if s is None:
            for e in entries:
                if names.get(x) == e.expr:
                    for a in e.aliases:
                        if a in by_lattice:
                            s = by_lattice[a]
        if s is None:
            raise TableError(f"no step decides {x}")
        if s in needed:
            return
        if "from" in s.params:
            visit(canonical(s.params["from"]))
        needed.append(s)

    visit(target.expr)
    text = "\n".join(str(s) for s in needed)
    runner = _Runner()
    for s in needed:
        e = next(x for x in entries if x.expr == names[s.lattice])
        try:
            cert = getattr(runner, s.kind)(s)
        except (ChiralityError, ValueError, KeyError) as exc:
            e.status, e.reason, e.method = "unknown", f"{s.kind}: {exc}", s.kind
            continue
        for x in (e.expr,) + e.aliases:
            runner.certs[x] = cert
        e.status, e.method, e.certificate = cert.claim, s.kind, cert
    if verify and target.certificate is not None:
        from .verify import Verifier, VerificationError

        try:
            Verifier().verify(target.certificate)
        except VerificationError as exc:
            target.status, target.reason, target.certificate = "unknown", f"verification failed: {exc}", None
    return target, parse_script(text)
