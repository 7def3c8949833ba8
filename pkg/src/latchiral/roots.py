"""Roots, levels and Vinberg's algorithm for even hyperbolic lattices.

A vector ``v`` of square ``s`` in ``{2, 4, 6}`` is a root when the
reflection ``x -> x - 2 (x.v / s) v`` preserves the lattice, i.e. when
every product ``x.v`` is divisible by ``s / 2``.  For a base point ``p``
with ``p.p < 0`` the level of ``v`` is ``2 (p.v)^2 / v.v``.

Because ``p.v`` is divisible by ``s / 2``, 2-roots sit at levels ``c^2``,
4-roots at ``2 c^2`` and 6-roots at ``3 c^2``; distinct kinds never share
a level.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import linalg
from .lattice import Lattice, signature
from .shortvec import Enumerator, vectors_of_norm

log = logging.getLogger(__name__)

ALLOWED = (2, 4, 6)


class RootError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Basic predicates


def is_root(L: Lattice, v: Sequence[int], allowed: Iterable[int] = (2, 6)) -> Optional[int]:
    """Square of ``v`` if it is a root of an allowed square, else ``None``."""
    s = L.norm(v)
    if s not in set(allowed) or s not in ALLOWED:
        return None
    k = s // 2
    if k > 1 and any(x % k for x in L.products(v)):
        return None
    return s


def level_of(L: Lattice, p: Sequence[int], v: Sequence[int]) -> Fraction:
    """``2 (p.v)^2 / v.v``."""
    return Fraction(2 * L.ip(p, v) ** 2, L.norm(v))


def reflection(L: Lattice, v: Sequence[int]) -> List[List[Fraction]]:
    """Matrix of ``x -> x - 2 (x.v / v.v) v`` on coordinate columns."""
    s = L.norm(v)
    Gv = L.products(v)
    n = L.rank
    return [[(1 if i == j else 0) - Fraction(2 * v[i] * Gv[j], s) for j in range(n)] for i in range(n)]


def default_base_point(L: Lattice) -> Tuple[int, ...]:
    """``u1 - u2`` of the first ``U``-type block, else the ``-A1`` generator."""
    for b in L.blocks:
        if b.kind == "U" and not b.negated:
            p = [0] * L.rank
            p[b.start], p[b.start + 1] = 1, -1
            return tuple(p)
    for b in L.blocks:
        if b.kind == "A" and b.n == 1 and b.negated:
            p = [0] * L.rank
            p[b.start] = 1
            return tuple(p)
    raise RootError("no default base point: lattice has neither a U block nor a -A1 block")


def _is_positive(v) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def _first_block(L: Lattice, v) -> int:
    i = next(k for k, x in enumerate(v) if x)
    for idx, b in enumerate(L.blocks):
        if b.start <= i < b.start + b.rank:
            return idx
    return len(L.blocks)


# ---------------------------------------------------------------------------
# Data types


@dataclass(frozen=True)
class RootConfig:
    """Parameters of a Vinberg run."""

    base_point: Tuple[int, ...]
    allowed_squares: Tuple[int, ...] = (2, 6)
    max_level: Fraction = Fraction(200)
    max_roots: int = 200
    check_volume: bool = True

    def __post_init__(self):
        object.__setattr__(self, "base_point", tuple(int(x) for x in self.base_point))
        sq = tuple(sorted(set(int(s) for s in self.allowed_squares)))
        if not sq or any(s not in ALLOWED for s in sq):
            raise RootError(f"allowed squares must be a non-empty subset of {ALLOWED}")
        object.__setattr__(self, "allowed_squares", sq)
        object.__setattr__(self, "max_level", Fraction(self.max_level))

    def to_json(self) -> Dict:
        return {
            "base_point": list(self.base_point),
            "allowed_squares": list(self.allowed_squares),
            "max_level": str(self.max_level),
            "max_roots": self.max_roots,
        }


@dataclass(frozen=True)
class Root:
    coords: Tuple[int, ...]
    square: int
    level: Fraction
    name: str = ""

    def to_json(self) -> Dict:
        return {"name": self.name, "coords": list(self.coords), "square": self.square,
                "level": str(self.level)}


@dataclass
class RootSequence:
    """State of a Vinberg run: the accepted walls in acceptance order."""

    lattice: Lattice
    config: RootConfig
    roots: List[Root] = field(default_factory=list)
    status: str = "budget_exhausted"
    volume_report: Optional[object] = None
    levels_scanned: List[Fraction] = field(default_factory=list)

    @property
    def vectors(self) -> List[Tuple[int, ...]]:
        return [r.coords for r in self.roots]

    def by_level(self) -> Dict[Fraction, List[Root]]:
        out: Dict[Fraction, List[Root]] = {}
        for r in self.roots:
            out.setdefault(r.level, []).append(r)
        return out

    def root(self, name: str) -> Root:
        for r in self.roots:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> Dict:
        return {
            "lattice": self.lattice.name,
            "config": self.config.to_json(),
            "roots": [r.to_json() for r in self.roots],
            "status": self.status,
        }


# ---------------------------------------------------------------------------
# Level zero


def _perp_basis(L: Lattice, p) -> List[List[int]]:
    return linalg.integer_kernel([L.products(p)])


def roots_orthogonal_to(L: Lattice, p, allowed=(2, 6)) -> List[Tuple[int, ...]]:
    """All roots of allowed squares in the positive definite ``p^perp``."""
    K = _perp_basis(L, p)
    out = []
    if not K:
        return out
    for s in sorted(set(allowed)):
        k = s // 2
        if k > 1:
            # y -> products of y K with the basis must vanish mod k
            M = [[sum(K[a][i] * L.gram[i][j] for i in range(L.rank)) for a in range(len(K))]
                 for j in range(L.rank)]
            Y = linalg.congruence_sublattice(M, k)
            B = linalg.matmul(Y, K)
        else:
            B = K
        gram = [[L.ip(x, y) for y in B] for x in B]
        for y in vectors_of_norm(gram, [s]):
            v = tuple(sum(y[i] * B[i][j] for i in range(len(B))) for j in range(L.rank))
            if is_root(L, v, allowed) == s:
                out.append(v)
    return sorted(set(out))


def initial_simple_system(L: Lattice, p, allowed=(2, 6)) -> List[Root]:
    """Simple roots of the finite root system ``p^perp``.

    Positive roots are those whose first nonzero coordinate is positive;
    the simple ones are the positive roots that are not a sum of two
    positive roots.  Order: by block of the first nonzero coordinate, then
    ascending lexicographic.
    """
    p = tuple(p)
    if L.norm(p) >= 0:
        raise RootError("base point must have negative square")
    pos = [v for v in roots_orthogonal_to(L, p, allowed) if _is_positive(v)]
    posset = set(pos)
    simple = []
    for a in pos:
        decomposable = False
        for b in pos:
            if b == a:
                continue
            d = tuple(x - y for x, y in zip(a, b))
            if d in posset:
                decomposable = True
                break
        if not decomposable:
            simple.append(a)
    simple.sort(key=lambda v: (_first_block(L, v), v))
    for i in range(len(simple)):
        for j in range(i):
            assert L.ip(simple[i], simple[j]) <= 0, "simple roots must be pairwise non-obtuse"
    return [Root(v, L.norm(v), Fraction(0)) for v in simple]


# ---------------------------------------------------------------------------
# Positive levels


class _LevelSearch:
    """Enumerates roots of a given level against a fixed level-0 system.

    A candidate is written ``v = (c / N) p - sum a_i w_i + sum c_j t_j``
    with ``N = -p.p``, ``w_i`` dual to the level-0 roots ``r_i`` inside
    their span, ``t_j`` dual to a basis of the remaining orthogonal part
    and ``a_i = -v.r_i >= 0``.  The norm equation separates, and the
    ``a``-part is searched with monotone pruning because the inverse of a
    non-obtuse positive definite Gram matrix is entrywise non-negative.
    """

    def __init__(self, L: Lattice, p, level0: Sequence[Sequence[int]]):
        self.L = L
        self.p = tuple(p)
        self.N = -L.norm(p)
        n = L.rank
        R = [list(r) for r in level0]
        self.R = R
        m = len(R)
        self.m = m
        if m:
            C = [[L.ip(x, y) for y in R] for x in R]
            Cinv = linalg.inverse(C)
            den = linalg.lcm_denominators([x for row in Cinv for x in row])
            self.den = den
            self.Ci = [[int(x * den) for x in row] for row in Cinv]
            self.omega = [[sum(Cinv[i][j] * R[j][t] for j in range(m)) for t in range(n)] for i in range(m)]
        else:
            self.den = 1
            self.Ci = []
            self.omega = []
        rows = [L.products(self.p)] + [L.products(r) for r in R]
        theta = linalg.integer_kernel(rows)
        if theta:
            H = [[L.ip(x, y) for y in theta] for x in theta]
            T = linalg.lll_gram(H)
            theta = linalg.matmul(T, theta)
            H = [[L.ip(x, y) for y in theta] for x in theta]
            Hinv = linalg.inverse(H)
            self.theta_dual = [[sum(Hinv[i][j] * theta[j][t] for j in range(len(theta))) for t in range(n)]
                               for i in range(len(theta))]
            self.Hinv = Hinv
        else:
            self.theta_dual = []
            self.Hinv = []
        self.q = len(self.theta_dual)
        self._enum: Dict[int, Enumerator] = {}

    def _enumerator(self, k: int) -> Enumerator:
        if k not in self._enum:
            self._enum[k] = Enumerator([[k * k * x for x in row] for row in self.Hinv])
        return self._enum[k]

    def candidates(self, s: int, c: int):
        """Vectors with ``v.v = s``, ``p.v = -c`` and ``v.r_i <= 0`` at level 0."""
        L, N = self.L, self.N
        k = s // 2
        target = Fraction(s) + Fraction(c * c, N)
        m = self.m
        den = self.den
        Ci = self.Ci
        bound = target * den  # scaled bound for the a-part
        base = [Fraction(c, N) * x for x in self.p]
        n = L.rank
        out = []
        a = [0] * m
        # partial products with Ci for incremental quadratic-form updates
        lin = [0] * m

        def finish(qa):
            rem = target - Fraction(qa, den)
            v = list(base)
            for i in range(m):
                if a[i]:
                    w = self.omega[i]
                    ai = a[i]
                    for t in range(n):
                        v[t] -= ai * w[t]
            if self.q == 0:
                if rem == 0:
                    yield v
                return
            for cc in self._enumerator(k)(rem, exact=True):
                w = list(v)
                for j in range(self.q):
                    if cc[j]:
                        d = self.theta_dual[j]
                        cj = k * cc[j]
                        for t in range(n):
                            w[t] += cj * d[t]
                yield w

        def rec(i, qa):
            if i == m:
                for v in finish(qa):
                    if all(x.denominator == 1 for x in v):
                        out.append(tuple(int(x) for x in v))
                return
            step = k
            ai = 0
            while True:
                # value if a_i = ai (others beyond i still zero)
                inc = ai * ai * Ci[i][i] + 2 * ai * lin[i]
                if qa + inc > bound:
                    break
                a[i] = ai
                if ai:
                    for j in range(i + 1, m):
                        lin[j] += ai * Ci[i][j]
                rec(i + 1, qa + inc)
                if ai:
                    for j in range(i + 1, m):
                        lin[j] -= ai * Ci[i][j]
                ai += step
            a[i] = 0

        rec(0, 0)
        res = []
        for v in out:
            if L.norm(v) == s and is_root(L, v, (s,)) == s and L.ip(self.p, v) == -c:
                res.append(v)
        return sorted(set(res))


def _level_schedule(allowed, max_level: Fraction):
    """Increasing ``(level, square, c)`` with ``level <= max_level``."""
    heap = []
    for s in allowed:
        k = s // 2
        heapq.heappush(heap, (Fraction(k), s, k))  # c = k, level = 2 k^2 / s = k
    while heap:
        lev, s, c = heapq.heappop(heap)
        if lev > max_level:
            return
        yield lev, s, c
        k = s // 2
        c2 = c + k
        heapq.heappush(heap, (Fraction(2 * c2 * c2, s), s, c2))


def enumerate_level(L: Lattice, p, level, allowed, accepted_so_far: Sequence[Sequence[int]],
                    level0: Optional[Sequence[Sequence[int]]] = None) -> List[Root]:
    """Roots at ``level`` on the negative side of ``p`` and of all accepted roots.

    ``level0`` defaults to the level-zero roots contained in
    ``accepted_so_far``.
    """
    level = Fraction(level)
    if level <= 0:
        raise RootError("level must be positive")
    p = tuple(p)
    if level0 is None:
        level0 = [r for r in accepted_so_far if L.ip(p, r) == 0]
    search = _LevelSearch(L, p, level0)
    return _level_roots(L, search, level, allowed, accepted_so_far)


def _level_roots(L, search, level, allowed, accepted):
    out = []
    for s in allowed:
        c2 = level * s / 2
        if c2.denominator != 1:
            continue
        from math import isqrt

        c = isqrt(c2.numerator)
        if c * c != c2.numerator or c == 0 or c % (s // 2):
            continue
        for v in search.candidates(s, c):
            if all(L.ip(v, w) <= 0 for w in accepted):
                out.append(Root(v, s, level))
    out.sort(key=lambda r: r.coords)
    return out


def _name_roots(L: Lattice, roots: List[Root]) -> List[Root]:
    named = []
    k = 0
    for r in roots:
        name = ""
        if r.level == 0:
            nz = [i for i, x in enumerate(r.coords) if x]
            if len(nz) == 1 and r.coords[nz[0]] == 1:
                lab = L.labels[nz[0]]
                if lab[:1] in ("d", "e"):
                    name = lab
        if not name:
            k += 1
            name = f"v{k}"
        named.append(Root(r.coords, r.square, r.level, name))
    return named


def run_vinberg(L: Lattice, config: Optional[RootConfig] = None, progress=None) -> RootSequence:
    """Vinberg's algorithm from the level-0 simple system upwards.

    After every non-empty batch the finite-volume criterion is tested on the
    Coxeter graph of the accepted roots; success ends the run with status
    ``complete``.  Otherwise the run stops with ``budget_exhausted`` once
    the next level exceeds ``max_level`` or ``max_roots`` is reached.
    """
    from .coxeter import build_graph, finite_volume_check

    if config is None:
        config = RootConfig(default_base_point(L))
    p = config.base_point
    if len(p) != L.rank:
        raise RootError("base point has the wrong length")
    if L.norm(p) >= 0:
        raise RootError("base point must have negative square")
    plus, minus = signature(L)
    if minus != 1:
        raise RootError("lattice is not hyperbolic")
    n = L.rank - 1
    level0 = initial_simple_system(L, p, config.allowed_squares)
    roots: List[Root] = list(level0)
    seq = RootSequence(L, config, [], "budget_exhausted")
    search = _LevelSearch(L, p, [r.coords for r in level0])

    def done():
        if not config.check_volume:
            return False
        G = build_graph(L, [r.coords for r in roots])
        verdict, report = finite_volume_check(G, n)
        seq.volume_report = report
        return verdict == "finite"

    complete = bool(roots) and done()
    if not complete:
        for level, s, c in _level_schedule(config.allowed_squares, config.max_level):
            if len(roots) >= config.max_roots:
                break
            seq.levels_scanned.append(level)
            batch = _level_roots(L, search, level, (s,), [r.coords for r in roots])
            for i in range(len(batch)):
                for j in range(i):
                    assert L.ip(batch[i].coords, batch[j].coords) <= 0, "same-level roots must be non-obtuse"
            if progress:
                progress(level, len(batch))
            if not batch:
                continue
            roots.extend(batch[: config.max_roots - len(roots)])
            if done():
                complete = True
                break
    seq.roots = _name_roots(L, roots)
    rep = seq.volume_report
    if rep is not None and rep.graph is not None and rep.graph.size == len(seq.roots):
        rep.graph.names = [r.name for r in seq.roots]
    seq.status = "complete" if complete else "budget_exhausted"
    return seq


def check_sequence(L: Lattice, seq: RootSequence) -> None:
    """Assert the structural invariants of a root sequence."""
    p = seq.config.base_point
    for r in seq.roots:
        assert is_root(L, r.coords, seq.config.allowed_squares) == r.square
        assert level_of(L, p, r.coords) == r.level
        assert L.ip(p, r.coords) <= 0
    vs = seq.vectors
    for i in range(len(vs)):
        for j in range(i):
            assert L.ip(vs[i], vs[j]) <= 0
