"""Even integral lattices given by exact Gram matrices.

Block conventions (all matrices are documented in the README):

* ``U``: the hyperbolic plane ``[[0, 1], [1, 0]]`` with basis ``u1, u2``.
* ``A_n``: the path ``a1 - a2 - ... - an``.
* ``D_n``: ``d1`` is the branch ("central") node, ``d2`` and ``d3`` are
  leaves attached to it and ``d4 - ... - dn`` is a chain hanging off
  ``d1``.  For ``D4`` the three leaves are ``d2, d3, d4``.
* ``E_6, E_7, E_8``: Bourbaki numbering, chain ``1-3-4-5-...-n`` with
  ``2`` attached to ``4``.
* ``<k>``: the rank one lattice with Gram ``[k]``, ``k`` even.

A scale ``L(m)`` multiplies the Gram matrix by ``m``; a leading minus
sign negates it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

from . import linalg


class LatticeError(ValueError):
    """Raised on invalid lattice input (unknown block, odd or degenerate form)."""


@dataclass(frozen=True)
class Block:
    """One orthogonal summand of a lattice built from named blocks."""

    kind: str  # "U", "A", "D", "E" or "diag"
    n: int  # rank parameter (for diag: the diagonal entry)
    scale: int = 1
    negated: bool = False
    start: int = 0

    @property
    def rank(self) -> int:
        if self.kind == "U":
            return 2
        if self.kind == "diag":
            return 1
        return self.n

    @property
    def name(self) -> str:
        if self.kind == "U":
            base = "U"
        elif self.kind == "diag":
            base = f"<{self.n}>"
        else:
            base = f"{self.kind}{self.n}"
        if self.scale != 1:
            base += f"({self.scale})"
        return ("-" if self.negated else "") + base


class Lattice:
    """An even, non-degenerate integral lattice.

    Parameters
    ----------
    gram : sequence of sequences of int
        Symmetric Gram matrix with even diagonal and nonzero determinant.
    labels : sequence of str, optional
        Names of the basis vectors.
    name : str, optional
        Display expression such as ``"U(2)+A2+E8"``.
    """

    __slots__ = ("gram", "labels", "name", "blocks")

    def __init__(self, gram, labels=None, name="", blocks=()):
        g = tuple(tuple(int(x) for x in row) for row in gram)
        n = len(g)
        if any(len(row) != n for row in g):
            raise LatticeError("Gram matrix must be square")
        for i in range(n):
            if g[i][i] % 2:
                raise LatticeError(f"diagonal entry {g[i][i]} is odd; lattice must be even")
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise LatticeError("Gram matrix must be symmetric")
        if linalg.det(g) == 0:
            raise LatticeError("Gram matrix is degenerate")
        if labels is None:
            labels = tuple(f"x{i + 1}" for i in range(n))
        labels = tuple(labels)
        if len(labels) != n:
            raise LatticeError("one label per basis vector required")
        self.gram = g
        self.labels = labels
        self.name = name
        self.blocks = tuple(blocks)

    # equality and hashing only see the quadratic form and its basis names
    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram and self.labels == other.labels

    def __hash__(self):
        return hash((self.gram, self.labels))

    def __repr__(self):
        return f"Lattice({self.name or 'rank ' + str(self.rank)})"

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return linalg.det(self.gram)

    def ip(self, x: Sequence, y: Sequence):
        """Bilinear form on coordinate sequences (no ambient checks)."""
        return linalg.bilinear(self.gram, x, y)

    def norm(self, x: Sequence):
        return linalg.bilinear(self.gram, x, x)

    def products(self, v: Sequence) -> List:
        """The vector ``G v`` of products of ``v`` with every basis vector."""
        return linalg.matvec(self.gram, v)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LatticeError(f"no basis vector named {label!r}") from None

    def basis_vector(self, label: str) -> Tuple[int, ...]:
        i = self.index_of(label)
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def rescaled(self, m: int) -> "Lattice":
        if m < 1:
            raise LatticeError("scale must be a positive integer")
        blocks = tuple(
            Block(b.kind, b.n, b.scale * m, b.negated, b.start) for b in self.blocks
        )
        name = f"({self.name})({m})" if self.name else ""
        return Lattice([[m * x for x in row] for row in self.gram], self.labels, name, blocks)


@dataclass(frozen=True)
class Vector:
    """Integral vector in the basis of ``ambient``."""

    coords: Tuple[int, ...]
    ambient: Lattice

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if len(self.coords) != self.ambient.rank:
            raise LatticeError("vector length does not match the lattice rank")


@dataclass(frozen=True)
class RationalVector:
    """Vector of ``ambient`` tensored with the rationals."""

    coords: Tuple[Fraction, ...]
    ambient: Lattice

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))
        if len(self.coords) != self.ambient.rank:
            raise LatticeError("vector length does not match the lattice rank")

    def __mul__(self, k):
        return RationalVector(tuple(k * c for c in self.coords), self.ambient)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def to_vector(self) -> Vector:
        return Vector(tuple(linalg.to_int(list(self.coords))), self.ambient)


AnyVector = Union[Vector, RationalVector, Sequence]


def _coords(L: Lattice, x: AnyVector) -> Tuple:
    if isinstance(x, (Vector, RationalVector)):
        if x.ambient != L:
            raise LatticeError("vector belongs to a different lattice")
        return x.coords
    x = tuple(x)
    if len(x) != L.rank:
        raise LatticeError("vector length does not match the lattice rank")
    return x


# ---------------------------------------------------------------------------
# Standard blocks


def _cartan_a(n):
    return [[2 if i == j else -1 if abs(i - j) == 1 else 0 for j in range(n)] for i in range(n)]


def _cartan_from_edges(n, edges):
    G = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in edges:
        G[i][j] = G[j][i] = -1
    return G


def _cartan_d(n):
    edges = [(0, 1), (0, 2)]
    prev = 0
    for k in range(3, n):
        edges.append((prev, k))
        prev = k
    return _cartan_from_edges(n, edges)


def _cartan_e(n):
    # Bourbaki: 1-3, 3-4, 4-5, ..., (n-1)-n and 2-4 (1-based)
    edges = [(0, 2), (1, 3)] + [(k, k + 1) for k in range(2, n - 1)]
    return _cartan_from_edges(n, edges)


_BLOCK_RE = re.compile(r"^(-)?(U|A|D|E)(\d*)$")


def make_standard(name: str, scale: int = 1) -> Lattice:
    """Standard named block multiplied entrywise by ``scale``.

    ``name`` is one of ``"U"``, ``"A<n>"``, ``"D<n>"`` (n >= 3),
    ``"E6"``, ``"E7"``, ``"E8"`` or ``"<k>"`` with ``k`` even, optionally
    prefixed by ``-`` for the negated form.

    >>> make_standard("U", 2).gram
    ((0, 2), (2, 0))
    """
    if not isinstance(scale, int) or scale < 1:
        raise LatticeError("scale must be a positive integer")
    text = name.strip().replace("⟨", "<").replace("⟩", ">").replace("−", "-")
    negated = text.startswith("-")
    core = text[1:] if negated else text
    m = re.fullmatch(r"<(-?\d+)>", core)
    if m:
        k = int(m.group(1))
        if k % 2:
            raise LatticeError(f"<{k}> is odd; only even diagonal blocks are allowed")
        if k == 0:
            raise LatticeError("<0> is degenerate")
        gram, kind, n, labels = [[k]], "diag", k, ["g"]
    else:
        m = _BLOCK_RE.match(core)
        if not m or (m.group(2) != "U" and not m.group(3)) or (m.group(2) == "U" and m.group(3)):
            raise LatticeError(f"unknown block {name!r}")
        kind = m.group(2)
        n = int(m.group(3)) if m.group(3) else 2
        if kind == "U":
            gram, labels = [[0, 1], [1, 0]], ["u1", "u2"]
        elif kind == "A":
            if n < 1:
                raise LatticeError(f"unknown block {name!r}")
            gram, labels = _cartan_a(n), [f"a{i + 1}" for i in range(n)]
        elif kind == "D":
            if n < 3:
                raise LatticeError("D_n needs n >= 3")
            gram, labels = _cartan_d(n), [f"d{i + 1}" for i in range(n)]
        else:
            if n not in (6, 7, 8):
                raise LatticeError("only E6, E7 and E8 are available")
            gram, labels = _cartan_e(n), [f"e{i + 1}" for i in range(n)]
    sign = -1 if negated else 1
    gram = [[sign * scale * x for x in row] for row in gram]
    block = Block(kind, n, scale, negated, 0)
    return Lattice(gram, labels, block.name, (block,))


def direct_sum(parts: Sequence[Lattice]) -> Lattice:
    """Orthogonal direct sum; repeated labels get prime suffixes (``e1'``)."""
    parts = list(parts)
    if not parts:
        raise LatticeError("direct sum of an empty list")
    if len(parts) == 1:
        return parts[0]
    n = sum(p.rank for p in parts)
    gram = [[0] * n for _ in range(n)]
    labels: List[str] = []
    blocks: List[Block] = []
    seen = set()
    off = 0
    for p in parts:
        for i in range(p.rank):
            for j in range(p.rank):
                gram[off + i][off + j] = p.gram[i][j]
        for lab in p.labels:
            new = lab
            while new in seen:
                new += "'"
            seen.add(new)
            labels.append(new)
        for b in p.blocks:
            blocks.append(Block(b.kind, b.n, b.scale, b.negated, b.start + off))
        off += p.rank
    name = "+".join(p.name or f"L{k}" for k, p in enumerate(parts))
    return Lattice(gram, labels, name, blocks)


def signature(L: Lattice) -> Tuple[int, int]:
    """``(n_plus, n_minus)`` by exact congruence diagonalization."""
    plus, minus, zero = linalg.inertia(L.gram)
    if zero:
        raise LatticeError("degenerate Gram matrix")
    return plus, minus


def inner(L: Lattice, x: AnyVector, y: AnyVector):
    """Exact value of ``x^T G y`` (an int or a Fraction)."""
    val = linalg.bilinear(L.gram, _coords(L, x), _coords(L, y))
    if isinstance(val, Fraction) and val.denominator == 1:
        return val.numerator
    return val


def weight_vector(L: Lattice, summand: int, name: str) -> RationalVector:
    """Dual basis vector of a root-lattice summand.

    ``weight_vector(L, k, "d1*")`` returns the vector of the ``k``-th block
    whose product with the block's basis vector ``d1`` is 1 and with the
    other basis vectors of that block is 0.
    """
    try:
        block = L.blocks[summand]
    except (IndexError, TypeError):
        raise LatticeError(f"no summand with index {summand}") from None
    m = re.fullmatch(r"([a-z])(\d+)\*?'*", name.strip().replace("^*", "*"))
    if block.kind not in ("A", "D", "E") or not m:
        raise LatticeError(f"block {block.name} has no dual vector {name!r}")
    letter, idx = m.group(1), int(m.group(2))
    if letter != block.kind.lower() or not 1 <= idx <= block.rank:
        raise LatticeError(f"block {block.name} has no dual vector {name!r}")
    s, r = block.start, block.rank
    sub = [[L.gram[s + i][s + j] for j in range(r)] for i in range(r)]
    inv = linalg.inverse(sub)
    coords = [Fraction(0)] * L.rank
    for j in range(r):
        coords[s + j] = inv[idx - 1][j]
    return RationalVector(tuple(coords), L)


def dual_basis(L: Lattice) -> linalg.Matrix:
    """Rows are the dual basis vectors (columns of ``G^{-1}``)."""
    return linalg.inverse(L.gram)


@dataclass(frozen=True)
class Saturation:
    is_primitive: bool
    index: int
    saturated_basis: Tuple[Tuple[int, ...], ...]


def saturation(L: Lattice, S: Iterable[AnyVector]) -> Saturation:
    """Primitive closure of the span of ``S`` inside ``L``.

    The closure is ``span_Q(S) ∩ L``; ``index`` is its index over
    ``span_Z(S)``.
    """
    vecs = [list(_coords(L, s)) for s in S]
    if not vecs or all(all(c == 0 for c in v) for v in vecs):
        raise LatticeError("S spans the zero subspace")
    n = L.rank
    span = linalg.row_hnf_basis(vecs)
    # span_Q(S) ∩ Z^n = integer kernel of the annihilator
    annihilator = linalg.nullspace(span)
    if annihilator:
        den = [linalg.lcm_denominators(a) for a in annihilator]
        ann = [[int(x * d) for x in a] for a, d in zip(annihilator, den)]
        closure = linalg.integer_kernel(ann)
    else:
        closure = linalg.identity(n)
    closure = linalg.row_hnf_basis(closure)
    # index = ratio of covolumes inside the k-dim space
    gs = _gram_det_of_rows(span)
    gc = _gram_det_of_rows(closure)
    idx2 = Fraction(gs, gc)
    index = _isqrt_exact(idx2)
    return Saturation(index == 1, index, tuple(tuple(v) for v in closure))


def _gram_det_of_rows(rows):
    M = linalg.matmul(rows, linalg.transpose(rows))
    return linalg.det(M)


def _isqrt_exact(q: Fraction) -> int:
    from math import isqrt

    if q.denominator != 1:
        raise ArithmeticError("non-integral index")
    r = isqrt(q.numerator)
    if r * r != q.numerator:
        raise ArithmeticError("non-square index")
    return r


def sublattice(L: Lattice, basis: Sequence[Sequence[int]], name: str = "", labels=None) -> Lattice:
    """Lattice spanned by the integral ``basis`` with the induced form."""
    gram = [[L.ip(x, y) for y in basis] for x in basis]
    return Lattice(gram, labels, name)


def orthogonal_complement(L: Lattice, S: Iterable[AnyVector]) -> Tuple[Lattice, List[Tuple[int, ...]]]:
    """Sublattice ``{x in L : x . s = 0 for all s in S}`` and its basis in ``L``."""
    vecs = [list(_coords(L, s)) for s in S]
    if not vecs:
        return L, [tuple(r) for r in linalg.identity(L.rank)]
    sub_gram = [[L.ip(x, y) for y in vecs] for x in vecs]
    r = linalg.rank(vecs)
    if linalg.rank(sub_gram) != r:
        raise LatticeError("S spans a degenerate subspace")
    rows = [L.products(v) for v in vecs]
    kernel = linalg.integer_kernel(rows)
    kernel = linalg.row_hnf_basis(kernel)
    basis = [tuple(v) for v in kernel]
    gram = [[L.ip(x, y) for y in basis] for x in basis]
    return Lattice(gram, None, f"({L.name})^perp" if L.name else ""), basis
