"""Discriminant groups ``L*/L`` with their finite quadratic forms."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Tuple

from . import linalg
from .lattice import Lattice, LatticeError, signature

#: exhaustive sweeps refuse groups larger than this
MAX_SWEEP_ORDER = 2 ** 20


class DiscriminantError(ValueError):
    pass


def mod2(q: Fraction) -> Fraction:
    q = Fraction(q)
    return q - 2 * (q.numerator // (2 * q.denominator))


def mod1(q: Fraction) -> Fraction:
    q = Fraction(q)
    return q - q.numerator // q.denominator


@dataclass(frozen=True)
class DiscriminantGroup:
    """Finite abelian group ``L*/L`` presented by cyclic generators.

    ``generators`` holds ``(order, lift)`` pairs, where ``lift`` is a
    rational coordinate vector in the basis of ``lattice``.  Orders form an
    invariant-factor chain.
    """

    lattice: Lattice
    generators: Tuple[Tuple[int, Tuple[Fraction, ...]], ...]

    @property
    def orders(self) -> List[int]:
        return [o for o, _ in self.generators]

    @property
    def order(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out

    def lift(self, coeffs) -> List[Fraction]:
        n = self.lattice.rank
        v = [Fraction(0)] * n
        for c, (_, g) in zip(coeffs, self.generators):
            if c:
                for i in range(n):
                    v[i] += c * g[i]
        return v

    def q(self, coeffs) -> Fraction:
        """Quadratic form value in ``Q/2Z``."""
        x = self.lift(coeffs)
        return mod2(self.lattice.ip(x, x))

    def b(self, c1, c2) -> Fraction:
        """Bilinear form value in ``Q/Z``."""
        return mod1(self.lattice.ip(self.lift(c1), self.lift(c2)))

    def elements(self) -> Iterator[Tuple[int, ...]]:
        if self.order > MAX_SWEEP_ORDER:
            raise DiscriminantError(f"group of order {self.order} exceeds the sweep cap")
        return itertools.product(*(range(o) for o in self.orders))

    def reduce(self, coeffs) -> Tuple[int, ...]:
        return tuple(c % o for c, o in zip(coeffs, self.orders))

    def contains(self, x) -> bool:
        """Whether the rational vector ``x`` lies in the dual lattice."""
        return linalg.is_integral(self.lattice.products(x))

    def generator_gram(self) -> List[List[Fraction]]:
        gens = [g for _, g in self.generators]
        return [[self.lattice.ip(a, b) for b in gens] for a in gens]

    def to_json(self) -> Dict:
        return {
            "orders": self.orders,
            "generators": [[str(c) for c in g] for _, g in self.generators],
            "q": [f"{self.q(e)} mod 2" for e in _unit_vectors(len(self.generators))],
            "b": [[f"{mod1(x)} mod 1" for x in row] for row in self.generator_gram()],
        }


def _unit_vectors(k):
    return [tuple(1 if i == j else 0 for j in range(k)) for i in range(k)]


def discriminant_group(L: Lattice) -> DiscriminantGroup:
    """``L*/L`` from the Smith form ``U G V = diag(d)``.

    The columns of ``V`` divided by the invariant factors are lifts of
    generators of ``L*/L``.
    """
    if L.det == 0:
        raise LatticeError("degenerate lattice")
    diag, _, V = linalg.smith_normal_form(L.gram)
    gens = []
    for i, d in enumerate(diag):
        d = abs(d)
        if d > 1:
            gens.append((d, tuple(Fraction(V[r][i], d) for r in range(L.rank))))
    gens.sort(key=lambda t: t[0])
    return DiscriminantGroup(L, tuple(gens))


def _split(o: int, p: int) -> Tuple[int, int]:
    pa = 1
    while o % p == 0:
        o //= p
        pa *= p
    return pa, o


def primary_part(D: DiscriminantGroup, p: int) -> DiscriminantGroup:
    """The ``p``-Sylow subgroup with the restricted form."""
    gens = []
    for o, g in D.generators:
        pa, m = _split(o, p)
        if pa > 1:
            gens.append((pa, tuple(m * c for c in g)))
    return DiscriminantGroup(D.lattice, tuple(gens))


def two_rank_and_parity(D: DiscriminantGroup) -> Tuple[int, str]:
    """Rank and parity of the 2-part, which must be 2-elementary."""
    D2 = primary_part(D, 2)
    if any(o != 2 for o in D2.orders):
        raise DiscriminantError("2-primary part is not 2-elementary")
    half = Fraction(1, 2)
    odd = any(mod1(D2.q(e)) == half for e in D2.elements())
    return len(D2.orders), "odd" if odd else "even"


@dataclass(frozen=True)
class ClassInvariants:
    """``(rho, d, parity)``; parity is ``"even"`` by convention when ``d = 0``."""

    rho: int
    d: int
    parity: str

    def as_tuple(self):
        return (self.rho, self.d, self.parity)


def class_invariants(L: Lattice) -> ClassInvariants:
    """Rank, 2-rank and parity of a lattice of the table family.

    Raises ``DiscriminantError`` naming the violated precondition when the
    lattice is not even hyperbolic with discriminant ``(2-elementary) + Z/3``
    and the form of ``<6>`` on the 3-part.
    """
    if any(L.gram[i][i] % 2 for i in range(L.rank)):
        raise DiscriminantError("lattice is not even")
    plus, minus = signature(L)
    if minus != 1:
        raise DiscriminantError(f"negative index is {minus}, expected 1")
    D = discriminant_group(L)
    for o in D.orders:
        rest = o
        for p in (2, 3):
            rest = _split(rest, p)[1]
        if rest != 1:
            raise DiscriminantError("discriminant has primes other than 2 and 3")
    D3 = primary_part(D, 3)
    if D3.orders != [3]:
        raise DiscriminantError(f"3-primary part has orders {D3.orders}, expected Z/3")
    if D3.q((1,)) != Fraction(2, 3):
        raise DiscriminantError("3-primary form differs from that of <6>")
    try:
        d, parity = two_rank_and_parity(D)
    except DiscriminantError as exc:
        raise DiscriminantError(str(exc)) from None
    return ClassInvariants(L.rank, d, parity)


def three_part_generator(L: Lattice) -> List[Fraction]:
    """Lift of a generator of the 3-primary part, required to be ``Z/3``."""
    D3 = primary_part(discriminant_group(L), 3)
    if D3.orders != [3]:
        raise DiscriminantError(f"3-primary part has orders {D3.orders}, expected Z/3")
    return list(D3.generators[0][1])
