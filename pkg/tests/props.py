"""Random-word property checks shared by the unit and acceptance suites."""
import random
from dataclasses import dataclass, field

from latchiral import linalg
from latchiral.chirality import delta3, delta3_by_six_root, symmetry_group_report
from latchiral.lattice import Lattice
from latchiral.roots import reflection


@dataclass
class WalkStats:
    instances: int = 0
    delta_pairs: int = 0
    delta_agree: int = 0
    hom_checks: int = 0
    failures: list = field(default_factory=list)


def int_matrix(M):
    return [[linalg.to_int(x) for x in row] for row in M]


def generators_of_run(seq):
    """Reflections in every wall and every induced graph symmetry."""
    L = seq.lattice
    gens = [int_matrix(reflection(L, r.coords)) for r in seq.roots]
    _, group = symmetry_group_report(L, seq)
    for perm, g, d in group:
        if g is not None:
            gens.append([list(r) for r in g.matrix])
    return gens


def six_root_of(seq):
    for r in seq.roots:
        if r.square == 6:
            return r.coords
    return None


def walk(L: Lattice, gens, six, rng: random.Random, count: int, stats: WalkStats, max_len: int = 6):
    """Check ``count`` random words in ``gens``.

    Each word is tested for preserving the Gram matrix and having
    determinant +-1; when a 6-root is given the two 3-part tests must
    agree, and the character must be multiplicative on the last letter.
    """
    G = [list(r) for r in L.gram]
    n = L.rank
    M = linalg.identity(n)
    dM = 1
    length = 0
    for _ in range(count):
        if length == max_len:
            M, dM, length = linalg.identity(n), 1, 0
        k = rng.randrange(len(gens))
        g = gens[k]
        M = linalg.matmul(M, g)
        length += 1
        stats.instances += 1
        if linalg.matmul(linalg.matmul(linalg.transpose(M), G), M) != G:
            stats.failures.append(("gram", L.name))
            continue
        if abs(linalg.det(M)) != 1:
            stats.failures.append(("det", L.name))
            continue
        d = delta3(L, M)
        if six is not None:
            stats.delta_pairs += 1
            if delta3_by_six_root(L, M, six) == d:
                stats.delta_agree += 1
            else:
                stats.failures.append(("delta3 methods", L.name))
        stats.hom_checks += 1
        if d != dM * delta3(L, g):
            stats.failures.append(("homomorphism", L.name))
        dM = d
    return stats


def random_pairs(L: Lattice, gens, rng: random.Random, count: int, stats: WalkStats, max_len: int = 4):
    """``delta3(ab) == delta3(a) delta3(b)`` for random words ``a``, ``b``."""
    n = L.rank

    def word():
        M = linalg.identity(n)
        for _ in range(rng.randint(1, max_len)):
            M = linalg.matmul(M, gens[rng.randrange(len(gens))])
        return M

    for _ in range(count):
        a, b = word(), word()
        stats.hom_checks += 1
        if delta3(L, linalg.matmul(a, b)) != delta3(L, a) * delta3(L, b):
            stats.failures.append(("homomorphism pair", L.name))
    return stats


def certificate_matrices(entries):
    """``(Lattice, matrix)`` for every certificate carrying an automorphism, premises included."""
    out = []
    seen = set()

    def visit(c):
        if id(c) in seen:
            return
        seen.add(id(c))
        M = c.data.get("matrix")
        if M is not None:
            out.append((Lattice(c.gram, None, c.lattice), [list(r) for r in M]))
        for s in c.data.get("symmetries", ()):
            if s.get("matrix"):
                out.append((Lattice(c.gram, None, c.lattice), [list(r) for r in s["matrix"]]))
        for p in c.premises:
            visit(p)

    for e in entries:
        if e.certificate is not None:
            visit(e.certificate)
    return out


def run_properties(runs, entries, per_run: int = 600, seed: int = 20240917) -> WalkStats:
    rng = random.Random(seed)
    stats = WalkStats()
    for seq in runs:
        L = seq.lattice
        gens = generators_of_run(seq)
        six = six_root_of(seq)
        walk(L, gens, six, rng, per_run, stats)
        random_pairs(L, gens, rng, 40, stats)
    for L, M in certificate_matrices(entries):
        # the certificate map together with its inverse
        walk(L, [M, _inverse(M)], None, rng, 30, stats)
    return stats


def _inverse(M):
    return int_matrix(linalg.inverse(M))


def polarization_check(D, small: int = 96):
    """Count pairs checked and failures of ``q(x+y) - q(x) - q(y) = 2b(x, y) mod 2``.

    ``y`` runs over all elements when ``|D| <= small`` and over the
    generators otherwise.  Also checks ``q(-x) = q(x)``.
    """
    from fractions import Fraction
    from itertools import product

    from latchiral.discriminant import mod2

    orders = D.orders
    elems = list(product(*(range(o) for o in orders)))
    q = {e: D.q(e) for e in elems}
    B = D.generator_gram()
    N = linalg.lcm_denominators([c for row in B for c in row])
    Bn = [[int(c * N) for c in row] for row in B]
    k = len(orders)

    def b(x, y):
        return Fraction(sum(x[i] * Bn[i][j] * y[j] for i in range(k) for j in range(k)), N)

    gens = [tuple(int(i == j) for i in range(k)) for j in range(k)]
    ys = elems if len(elems) <= small else gens
    checked = bad = 0
    for x in elems:
        for y in ys:
            s = D.reduce(tuple(a + c for a, c in zip(x, y)))
            checked += 1
            bad += mod2(q[s] - q[x] - q[y] - 2 * b(x, y)) != 0
        bad += q[D.reduce(tuple(-a for a in x))] != q[x]
    return checked, bad
