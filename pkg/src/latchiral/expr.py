"""Lattice expressions such as ``U(2)+A2+2*E8`` or ``-A1+<6>+3A1``.

Grammar::

    expr := term ('+' term)*
    term := [int ['*']] atom
    atom := ['-'] name ['(' int ')'] | ['-'] '<' int '>' ['(' int ')']
    name := 'U' | 'A' int | 'D' int | 'E' int

Unicode angle brackets, the minus sign and subscript digits are
accepted.  Whitespace is ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .lattice import Lattice, LatticeError, direct_sum, make_standard

_DIGITS = "0123456789"
_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")


class ExprError(LatticeError):
    """Syntax or semantic error with the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Term:
    mult: int
    kind: str  # "U", "A", "D", "E" or "diag"
    n: int
    scale: int = 1
    negated: bool = False

    @property
    def block(self) -> str:
        core = f"<{self.n}>" if self.kind == "diag" else ("U" if self.kind == "U" else f"{self.kind}{self.n}")
        if self.scale != 1:
            core += f"({self.scale})"
        return ("-" if self.negated else "") + core

    def __str__(self):
        return (f"{self.mult}" if self.mult != 1 else "") + self.block


@dataclass(frozen=True)
class LatticeExpression:
    source: str
    terms: Tuple[Term, ...]

    def __str__(self):
        return "+".join(str(t) for t in self.terms)

    @property
    def canonical(self) -> str:
        return str(self)


def _normalize(text: str) -> str:
    return (text.replace("⟨", "<").replace("⟩", ">").replace("〈", "<").replace("〉", ">")
            .replace("−", "-").replace("∗", "*").translate(_SUBSCRIPTS))


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise ExprError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def integer(self, signed=False) -> int:
        self.skip()
        start = self.pos
        if signed and self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos] in _DIGITS:
            self.pos += 1
        digits = self.text[start:self.pos]
        if not digits or digits == "-":
            self.pos = start
            raise ExprError("expected an integer", start)
        return int(digits)


def _atom(sc: _Scanner, mult: int) -> Term:
    negated = False
    if sc.peek() == "-":
        sc.pos += 1
        negated = True
    start = sc.pos
    ch = sc.peek()
    start = sc.pos
    if ch == "<":
        sc.pos += 1
        k = sc.integer(signed=True)
        sc.take(">")
        if k == 0:
            raise ExprError("<0> is degenerate", start)
        if k % 2:
            raise ExprError(f"<{k}> is odd; the lattice would not be even", start)
        kind, n = "diag", k
    elif ch in ("U", "A", "D", "E"):
        sc.pos += 1
        kind = ch
        if kind == "U":
            n = 2
        else:
            n = sc.integer()
            if kind == "A" and n < 1 or kind == "D" and n < 3 or kind == "E" and n not in (6, 7, 8):
                raise ExprError(f"unknown block {kind}{n}", start)
    elif ch == "":
        raise ExprError("unexpected end of input", sc.pos)
    else:
        raise ExprError(f"unknown block starting with {ch!r}", sc.pos)
    scale = 1
    if sc.peek() == "(":
        sc.pos += 1
        p = sc.pos
        scale = sc.integer()
        if scale < 1:
            raise ExprError("scale must be positive", p)
        sc.take(")")
    return Term(mult, kind, n, scale, negated)


def parse_lattice_expr(text: str) -> LatticeExpression:
    """Parse an expression; raises ``ExprError`` with a position on failure."""
    if not isinstance(text, str):
        raise ExprError("expression must be a string", 0)
    sc = _Scanner(_normalize(text))
    terms: List[Term] = []
    while True:
        mult = 1
        if sc.peek() and sc.peek() in _DIGITS:
            p = sc.pos
            mult = sc.integer()
            if mult < 1:
                raise ExprError("multiplier must be positive", p)
            if sc.peek() == "*":
                sc.pos += 1
        terms.append(_atom(sc, mult))
        if sc.peek() == "+":
            sc.pos += 1
            continue
        if sc.peek():
            raise ExprError(f"unexpected {sc.peek()!r}", sc.pos)
        break
    return LatticeExpression(text, tuple(terms))


def build_lattice(expr) -> Lattice:
    """Lattice of an expression (text or parsed)."""
    ast = parse_lattice_expr(expr) if isinstance(expr, str) else expr
    parts = []
    for t in ast.terms:
        for _ in range(t.mult):
            parts.append(make_standard(("-" if t.negated else "") +
                                       (f"<{t.n}>" if t.kind == "diag" else ("U" if t.kind == "U" else f"{t.kind}{t.n}")),
                                       t.scale))
    L = direct_sum(parts)
    return Lattice(L.gram, L.labels, str(ast), L.blocks)
