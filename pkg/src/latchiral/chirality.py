"""Automorphisms induced by graph symmetries, their Z/3 character and
chirality verdicts.

An automorphism is stored as an integer matrix ``M`` acting on column
coordinate vectors, ``x -> M x``; it preserves the form when
``M^T G M = G``.

A lattice is *achiral* when some automorphism preserving a chamber of
its 2-/6-root reflection group together with its sheet acts by ``-1``
on the ``Z/3`` part of the discriminant, and *chiral* otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .coxeter import build_graph, classify_subdiagram, graph_symmetries, is_symmetry
from .discriminant import DiscriminantError, class_invariants, discriminant_group, three_part_generator
from .lattice import Lattice, orthogonal_complement, saturation, signature
from .roots import RootConfig, RootSequence, default_base_point, is_root, reflection, run_vinberg


class ChiralityError(ValueError):
    """A precondition of a certificate or derivation step failed."""


# ---------------------------------------------------------------------------
# Automorphisms


@dataclass(frozen=True)
class LatticeAutomorphism:
    lattice: Lattice
    matrix: Tuple[Tuple[int, ...], ...]

    def __call__(self, x):
        return tuple(sum(r[j] * x[j] for j in range(len(x))) for r in self.matrix)

    def compose(self, other: "LatticeAutomorphism") -> "LatticeAutomorphism":
        """``self`` after ``other``."""
        return LatticeAutomorphism(self.lattice, _tuple(linalg.matmul(self.matrix, other.matrix)))

    def check(self) -> None:
        """Raise unless the matrix is integral, form-preserving and unimodular."""
        check_automorphism(self.lattice, self.matrix)

    def to_json(self):
        return [list(r) for r in self.matrix]


def _tuple(M) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in M)


def check_automorphism(L: Lattice, M) -> None:
    n = L.rank
    if len(M) != n or any(len(r) != n for r in M):
        raise ChiralityError("matrix has the wrong shape")
    if not all(linalg.is_integral(r) for r in M):
        raise ChiralityError("matrix is not integral")
    Mt = linalg.transpose(M)
    if linalg.matmul(linalg.matmul(Mt, L.gram), M) != [list(r) for r in L.gram]:
        raise ChiralityError("matrix does not preserve the Gram matrix")
    if abs(linalg.det(M)) != 1:
        raise ChiralityError("matrix is not unimodular")


def identity_automorphism(L: Lattice) -> LatticeAutomorphism:
    return LatticeAutomorphism(L, _tuple(linalg.identity(L.rank)))


def spans_lattice(L: Lattice, vectors: Sequence[Sequence[int]]) -> bool:
    """Whether ``vectors`` generate ``L`` over the integers."""
    if not vectors:
        return L.rank == 0
    H = linalg.row_hnf_basis([list(v) for v in vectors])
    return len(H) == L.rank and abs(linalg.det(H)) == 1


def linear_map_from_images(L: Lattice, J: Sequence[Sequence[int]], images: Sequence[Sequence[int]]):
    """Rational matrix ``M`` with ``M J[i] = images[i]``, or ``None``.

    ``J`` must span ``L`` over the rationals.
    """
    n = L.rank
    basis_idx: List[int] = []
    rows: List[List[int]] = []
    for i, v in enumerate(J):
        trial = rows + [list(v)]
        if linalg.rank(trial) > len(rows):
            rows = trial
            basis_idx.append(i)
        if len(rows) == n:
            break
    if len(rows) < n:
        raise ChiralityError("vectors do not span the lattice over Q")
    A = linalg.transpose(rows)
    B = linalg.transpose([list(images[i]) for i in basis_idx])
    M = linalg.matmul(B, linalg.inverse(A))
    for v, w in zip(J, images):
        if [Fraction(x) for x in linalg.matvec(M, v)] != [Fraction(x) for x in w]:
            return None
    return M


def automorphism_from_symmetry(L: Lattice, J: Sequence[Sequence[int]], sigma: Sequence[int]) -> LatticeAutomorphism:
    """The automorphism sending ``J[i]`` to ``J[sigma[i]]``.

    Requires ``J`` to generate ``L`` over the integers, which makes the
    induced map unique and integral.
    """
    if not spans_lattice(L, J):
        raise ChiralityError("the roots do not span the lattice over Z")
    G = build_graph(L, J)
    if not is_symmetry(G, sigma):
        raise ChiralityError("permutation is not a symmetry of the Coxeter graph")
    M = linear_map_from_images(L, J, [J[sigma[i]] for i in range(len(J))])
    assert M is not None and all(linalg.is_integral(r) for r in M), "symmetry must induce an integral map"
    g = LatticeAutomorphism(L, _tuple([[linalg.to_int(x) for x in r] for r in M]))
    g.check()
    return g


def induced_map(L: Lattice, J: Sequence[Sequence[int]], sigma: Sequence[int]) -> Optional[LatticeAutomorphism]:
    """Automorphism induced by ``sigma`` when one exists.

    ``J`` need only span over the rationals; ``None`` is returned when the
    induced rational map is not an automorphism of ``L``.
    """
    M = linear_map_from_images(L, J, [J[sigma[i]] for i in range(len(J))])
    if M is None or not all(linalg.is_integral(r) for r in M):
        return None
    M = _tuple([[linalg.to_int(x) for x in r] for r in M])
    try:
        check_automorphism(L, M)
    except ChiralityError:
        return None
    return LatticeAutomorphism(L, M)


# ---------------------------------------------------------------------------
# The character on discr_3


def delta3(L: Lattice, g) -> int:
    """``+1`` if ``g`` fixes the ``Z/3`` part of ``L*/L``, ``-1`` if it negates it."""
    M = g.matrix if isinstance(g, LatticeAutomorphism) else g
    try:
        x = three_part_generator(L)
    except DiscriminantError as exc:
        raise ChiralityError(str(exc)) from None
    gx = linalg.matvec(M, x)
    if linalg.is_integral([a - b for a, b in zip(gx, x)]):
        return 1
    if linalg.is_integral([a + b for a, b in zip(gx, x)]):
        return -1
    raise ChiralityError("automorphism does not preserve the 3-part")


def delta3_by_six_root(L: Lattice, g, v: Sequence[int]) -> int:
    """Sign from a 6-root ``v``: ``+1`` iff ``v - g(v)`` lies in ``3L``.

    A 6-root is never divisible by 3, so ``v/3`` generates the ``Z/3``
    part and the test is exact.
    """
    if is_root(L, v, (6,)) != 6:
        raise ChiralityError("not a 6-root")
    M = g.matrix if isinstance(g, LatticeAutomorphism) else g
    gv = linalg.matvec(M, v)
    if all((a - b) % 3 == 0 for a, b in zip(v, gv)):
        return 1
    assert all((a + b) % 3 == 0 for a, b in zip(v, gv)), "image of a 6-root must be +-v mod 3L"
    return -1


def sheet_preserving(L: Lattice, g, p: Sequence[int]) -> bool:
    """``p`` and ``g(p)`` lie in the same sheet of the negative cone."""
    if L.norm(p) >= 0:
        raise ChiralityError("test vector must have negative square")
    M = g.matrix if isinstance(g, LatticeAutomorphism) else g
    return L.ip(p, linalg.matvec(M, p)) < 0


def delta3_checked(L: Lattice, g, six_roots: Sequence[Sequence[int]] = ()) -> Tuple[int, Optional[Tuple[int, ...]]]:
    """``delta3`` cross-checked against the first available 6-root."""
    d = delta3(L, g)
    for v in six_roots:
        d2 = delta3_by_six_root(L, g, v)
        assert d == d2, "the two Z/3 tests disagree"
        return d, tuple(v)
    return d, None


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class Certificate:
    """Self-contained record re-checkable by :mod:`latchiral.verify`.

    ``lattice`` is the expression of the lattice the claim is about and
    ``gram`` a Gram matrix realizing it (for derived lattices this is a
    realization identified with the expression through its class
    invariants).  ``premises`` are certificates the claim depends on.
    """

    kind: str
    claim: str  # "achiral" or "chiral"
    lattice: str
    gram: List[List[int]]
    data: Dict = field(default_factory=dict)
    premises: List["Certificate"] = field(default_factory=list)
    citations: List[str] = field(default_factory=list)

    def to_json(self) -> Dict:
        return {
            "kind": self.kind,
            "claim": self.claim,
            "lattice": self.lattice,
            "gram": [list(r) for r in self.gram],
            "data": self.data,
            "premises": [p.to_json() for p in self.premises],
            "citations": list(self.citations),
        }

    @classmethod
    def from_json(cls, d: Dict) -> "Certificate":
        return cls(d["kind"], d["claim"], d["lattice"], [list(r) for r in d["gram"]], dict(d.get("data", {})),
                   [cls.from_json(p) for p in d.get("premises", [])], list(d.get("citations", [])))

    @property
    def automorphism(self) -> Optional[List[List[int]]]:
        return self.data.get("matrix")


@dataclass
class ChiralityVerdict:
    status: str  # "chiral", "achiral" or "unknown"
    certificates: List[Certificate] = field(default_factory=list)
    reason: str = ""

    def to_json(self) -> Dict:
        return {"status": self.status, "reason": self.reason,
                "certificates": [c.to_json() for c in self.certificates]}


def _vec(v):
    return [int(x) for x in v]


def _config_json(cfg: RootConfig) -> Dict:
    return {"base_point": _vec(cfg.base_point), "squares": list(cfg.allowed_squares),
            "max_level": str(cfg.max_level), "max_roots": cfg.max_roots}


def _six_roots(L, J):
    return [v for v in J if L.norm(v) == 6]


def achirality_certificate(L: Lattice, roots: Sequence[Sequence[int]], sigma: Sequence[int],
                           names: Optional[Sequence[str]] = None, config: Optional[RootConfig] = None,
                           expr: Optional[str] = None) -> Certificate:
    """Certificate that ``L`` is achiral, from a symmetry of a wall subset.

    ``roots`` must be chamber walls (e.g. a prefix of a Vinberg sequence);
    they need not form a complete system but must generate ``L``.

    Raises
    ------
    ChiralityError
        If the roots do not span ``L`` over Z, the permutation is not a
        symmetry, the induced map reverses the sheet, or it acts by ``+1``
        on the 3-part.
    """
    roots = [tuple(int(x) for x in r) for r in roots]
    g = automorphism_from_symmetry(L, roots, sigma)
    p = tuple(config.base_point) if config is not None else default_base_point(L)
    if not sheet_preserving(L, g, p):
        raise ChiralityError("induced automorphism swaps the sheets")
    d, witness = delta3_checked(L, g, _six_roots(L, roots))
    if d != -1:
        raise ChiralityError("induced automorphism is Z/3-direct")
    data = {
        "roots": [_vec(r) for r in roots],
        "names": list(names) if names else [f"r{i + 1}" for i in range(len(roots))],
        "sigma": list(sigma),
        "matrix": [list(r) for r in g.matrix],
        "base_point": _vec(p),
        "delta3": d,
        "six_root_witness": _vec(witness) if witness else None,
    }
    if config is not None:
        data["vinberg"] = _config_json(config)
    return Certificate("symmetry", "achiral", expr or L.name, [list(r) for r in L.gram], data,
                       citations=["symmetry of a spanning wall subgraph induces a chamber automorphism",
                                  "Z/3 action via the discriminant and via 6-roots"])


def symmetry_group_report(L: Lattice, seq_or_roots, allowed=(2, 6)):
    """Every graph symmetry with its induced automorphism (if any) and character."""
    roots = seq_or_roots.vectors if isinstance(seq_or_roots, RootSequence) else [tuple(r) for r in seq_or_roots]
    G = build_graph(L, roots)
    out = []
    six = _six_roots(L, roots)
    for s in graph_symmetries(G):
        g = induced_map(L, roots, s.perm)
        if g is None:
            out.append((s.perm, None, None))
            continue
        d, _ = delta3_checked(L, g, six)
        out.append((s.perm, g, d))
    return G, out


def chirality_proof(L: Lattice, seq: RootSequence, expr: Optional[str] = None) -> Certificate:
    """Certificate that ``L`` is chiral from a complete wall system.

    Every chamber automorphism permutes the walls, so it is induced by a
    graph symmetry; the lattice is chiral when every symmetry inducing an
    automorphism acts by ``+1`` on the 3-part.
    """
    if seq.status != "complete":
        raise ChiralityError("root sequence is not complete")
    if any(r.square == 4 for r in seq.roots):
        raise ChiralityError("use extended_group_chirality for systems with 4-roots")
    G, group = symmetry_group_report(L, seq)
    rows = []
    for perm, g, d in group:
        if d == -1:
            raise ChiralityError("a graph symmetry induces a Z/3-reversing automorphism")
        rows.append({"sigma": list(perm), "matrix": g.to_json() if g else None, "delta3": d})
    data = {
        "vinberg": _config_json(seq.config),
        "roots": [_vec(r.coords) for r in seq.roots],
        "names": [r.name for r in seq.roots],
        "levels": [str(r.level) for r in seq.roots],
        "volume": seq.volume_report.to_json() if seq.volume_report else None,
        "symmetries": rows,
    }
    return Certificate("complete", "chiral", expr or L.name, [list(r) for r in L.gram], data,
                       citations=["finite-volume criterion certifies the wall system",
                                  "chamber automorphisms are graph symmetries"])


def extended_group_chirality(L: Lattice, config: Optional[RootConfig] = None, expr: Optional[str] = None,
                             seq: Optional[RootSequence] = None) -> Certificate:
    """Chirality from the chamber of the group generated by 2-, 4- and 6-root reflections.

    Every automorphism of a chamber of the smaller 2-/6-root group is a
    product of a symmetry of the finer chamber and reflections in 4-root
    walls of it.  When all of these act by ``+1`` on the 3-part the
    lattice is chiral.  Mixed cases are rejected.
    """
    if config is None:
        config = RootConfig(default_base_point(L), (2, 4, 6))
    if 4 not in config.allowed_squares:
        raise ChiralityError("extended mode needs 4-roots")
    try:
        three_part_generator(L)
    except DiscriminantError as exc:
        raise ChiralityError(str(exc)) from None
    if seq is None:
        seq = run_vinberg(L, config)
    if seq.status != "complete":
        raise ChiralityError("extended root sequence is not complete")
    G, group = symmetry_group_report(L, seq)
    rows = []
    for perm, g, d in group:
        if d == -1:
            raise ChiralityError("a symmetry of the extended chamber is Z/3-reversing; method inconclusive")
        rows.append({"sigma": list(perm), "matrix": g.to_json() if g else None, "delta3": d})
    walls = []
    for r in seq.roots:
        if r.square != 4:
            continue
        R = reflection(L, r.coords)
        M = _tuple([[linalg.to_int(x) for x in row] for row in R])
        check_automorphism(L, M)
        d = delta3(L, M)
        if d != 1:
            raise ChiralityError(f"reflection in 4-root {r.name} is Z/3-reversing; method inconclusive")
        walls.append({"name": r.name, "root": _vec(r.coords), "delta3": d})
    data = {
        "vinberg": _config_json(seq.config),
        "roots": [_vec(r.coords) for r in seq.roots],
        "names": [r.name for r in seq.roots],
        "levels": [str(r.level) for r in seq.roots],
        "volume": seq.volume_report.to_json() if seq.volume_report else None,
        "symmetries": rows,
        "four_root_walls": walls,
    }
    return Certificate("extended_group", "chiral", expr or L.name, [list(r) for r in L.gram], data,
                       citations=["finite-volume criterion certifies the extended wall system",
                                  "chamber automorphisms factor through 4-root wall reflections"])


def no_small_roots_by_congruence(L: Lattice) -> bool:
    """All squares are divisible by 4, so no vector has square 2 or 6."""
    n = L.rank
    return all(L.gram[i][i] % 4 == 0 for i in range(n)) and all(
        L.gram[i][j] % 2 == 0 for i in range(n) for j in range(n))


def rootless_certificate(L: Lattice, g, p: Optional[Sequence[int]] = None, expr: Optional[str] = None) -> Certificate:
    """Achirality of a lattice without 2- and 6-roots.

    With no roots the chamber is the whole cone, so any sheet-preserving
    automorphism acting by ``-1`` on the 3-part is a witness.
    """
    M = g.matrix if isinstance(g, LatticeAutomorphism) else _tuple(g)
    if not no_small_roots_by_congruence(L):
        raise ChiralityError("lattice may have 2- or 6-roots (congruence test fails)")
    check_automorphism(L, M)
    p = tuple(p) if p is not None else _negative_vector(L)
    if not sheet_preserving(L, M, p):
        raise ChiralityError("automorphism swaps the sheets")
    if delta3(L, M) != -1:
        raise ChiralityError("automorphism is Z/3-direct")
    data = {"matrix": [list(r) for r in M], "test_point": _vec(p), "delta3": -1,
            "root_test": "all squares divisible by 4"}
    return Certificate("rootless", "achiral", expr or L.name, [list(r) for r in L.gram], data,
                       citations=["no roots: the chamber is the whole cone"])


def _negative_vector(L: Lattice) -> Tuple[int, ...]:
    try:
        return default_base_point(L)
    except Exception:
        pass
    n = L.rank
    for i in range(n):
        if L.gram[i][i] < 0:
            return tuple(1 if j == i else 0 for j in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            for s in (1, -1):
                v = [0] * n
                v[i], v[j] = 1, s
                if L.norm(v) < 0:
                    return tuple(v)
    raise ChiralityError("no simple negative vector found")


def block_negation(L: Lattice, negate_blocks: Sequence[int]) -> LatticeAutomorphism:
    """``-id`` on the listed block summands and ``id`` elsewhere."""
    n = L.rank
    sign = [1] * n
    for b in negate_blocks:
        blk = L.blocks[b]
        for i in range(blk.start, blk.start + blk.rank):
            sign[i] = -1
    M = [[sign[i] if i == j else 0 for j in range(n)] for i in range(n)]
    g = LatticeAutomorphism(L, _tuple(M))
    g.check()
    return g


# ---------------------------------------------------------------------------
# Derivation steps


def check_extension_summand(Le: Lattice) -> None:
    """Positive definite, generated by 2-roots, discriminant of period 2."""
    plus, minus = signature(Le)
    if minus:
        raise ChiralityError("summand is not positive definite")
    D = discriminant_group(Le)
    if any(o != 2 for o in D.orders):
        raise ChiralityError(f"summand discriminant has orders {D.orders}, not period 2")
    from .shortvec import vectors_of_norm

    twos = vectors_of_norm(Le.gram, [2])
    if not spans_lattice(Le, twos):
        raise ChiralityError("summand is not generated by 2-roots")


def block_sum_matrix(A, B):
    a, b = len(A), len(B)
    out = [[0] * (a + b) for _ in range(a + b)]
    for i in range(a):
        for j in range(a):
            out[i][j] = A[i][j]
    for i in range(b):
        for j in range(b):
            out[a + i][a + j] = B[i][j]
    return out


def extension_step(Le: Lattice, base: Certificate, target_expr: Optional[str] = None,
                   summand_expr: Optional[str] = None) -> Certificate:
    """Direct sum with a 2-root-generated elliptic lattice of period 2.

    If ``base`` certifies achirality of ``Lh`` then ``Lh + Le`` is achiral,
    witnessed by ``g + id``.  If ``base`` certifies chirality of a lattice
    ``Lh + Le`` then ``Lh`` (``target_expr``) is chiral, since achirality
    would propagate upwards.
    """
    check_extension_summand(Le)
    if base.claim == "achiral":
        g = base.automorphism
        if g is None:
            raise ChiralityError("premise carries no automorphism")
        gram = block_sum_matrix(base.gram, Le.gram)
        M = block_sum_matrix(g, linalg.identity(Le.rank))
        L = Lattice(gram)
        check_automorphism(L, M)
        if delta3(L, M) != -1:
            raise ChiralityError("extended automorphism is Z/3-direct")
        inv = class_invariants(L).as_tuple()
        data = {"summand": summand_expr or Le.name, "summand_gram": [list(r) for r in Le.gram],
                "matrix": M, "invariants": list(inv), "direction": "up"}
        expr = target_expr or f"{base.lattice}+{summand_expr or Le.name}"
        return Certificate("extension", "achiral", expr, gram, data, [base],
                           ["achirality passes to sums with 2-root-generated elliptic lattices of period 2"])
    if base.claim == "chiral":
        if target_expr is None:
            raise ChiralityError("chiral descent needs the target expression")
        from .expr import build_lattice

        Lt = build_lattice(target_expr)
        big = Lattice(block_sum_matrix(Lt.gram, Le.gram))
        inv_big = class_invariants(big).as_tuple()
        inv_base = class_invariants(Lattice(base.gram)).as_tuple()
        if inv_big != inv_base:
            raise ChiralityError(f"target plus summand has invariants {inv_big}, premise {inv_base}")
        data = {"summand": summand_expr or Le.name, "summand_gram": [list(r) for r in Le.gram],
                "invariants": list(class_invariants(Lt).as_tuple()), "direction": "down"}
        return Certificate("extension", "chiral", target_expr, [list(r) for r in Lt.gram], data, [base],
                           ["contrapositive: an achiral summand would make the sum achiral"])
    raise ChiralityError(f"premise claim {base.claim!r} cannot be extended")


def reduction_step(base: Certificate, J: Sequence[int], target_expr: Optional[str] = None) -> Certificate:
    """Restrict a symmetry certificate to the orthogonal complement of ``J``.

    ``J`` indexes roots of ``base`` (a ``symmetry`` certificate).  The set
    must be invariant, span an elliptic sublattice of discriminant period
    2 and be primitive.
    """
    if base.kind != "symmetry" or base.claim != "achiral":
        raise ChiralityError("reduction needs a symmetry certificate")
    L = Lattice(base.gram)
    roots = [tuple(r) for r in base.data["roots"]]
    sigma = base.data["sigma"]
    J = sorted(set(int(j) for j in J))
    if not J:
        raise ChiralityError("empty J")
    if sorted(sigma[j] for j in J) != J:
        raise ChiralityError("J is not invariant under the symmetry")
    G = build_graph(L, roots)
    cls = classify_subdiagram(G, J)
    if cls.kind != "elliptic":
        raise ChiralityError(f"J spans a {cls.kind} subdiagram")
    vecs = [roots[j] for j in J]
    LJ = Lattice([[L.ip(a, b) for b in vecs] for a in vecs])
    D = discriminant_group(LJ)
    if any(o != 2 for o in D.orders):
        raise ChiralityError(f"discriminant of L_J has orders {D.orders}, not period 2")
    sat = saturation(L, vecs)
    if not sat.is_primitive:
        raise ChiralityError(f"L_J has index {sat.index} in its saturation")
    comp, basis = orthogonal_complement(L, vecs)
    M = base.data["matrix"]
    # coordinates of g(b) in the complement basis
    images = [linalg.matvec(M, b) for b in basis]
    Bt = linalg.transpose([list(b) for b in basis])
    R = []
    for img in images:
        sol = linalg.solve(Bt, img)
        if sol is None or not linalg.is_integral(sol):
            raise ChiralityError("automorphism does not preserve the complement")
        R.append([linalg.to_int(x) for x in sol])
    Mr = linalg.transpose(R)
    check_automorphism(comp, Mr)
    if delta3(comp, Mr) != -1:
        raise ChiralityError("restriction is Z/3-direct")
    inv = class_invariants(comp).as_tuple()
    names = base.data.get("names") or []
    data = {"J": J, "J_names": [names[j] for j in J] if names else None, "J_type": cls.name,
            "complement_basis": [list(b) for b in basis], "matrix": [list(r) for r in Mr],
            "invariants": list(inv)}
    return Certificate("reduction", "achiral", target_expr or f"({base.lattice})^J", [list(r) for r in comp.gram],
                       data, [base], ["restriction of a chamber automorphism to the complement of an invariant "
                                      "elliptic face of period 2"])
