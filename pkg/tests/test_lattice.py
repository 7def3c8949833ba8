from fractions import Fraction
from itertools import product

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from latchiral import linalg
from latchiral.discriminant import (DiscriminantError, class_invariants, discriminant_group, mod2,
                                    primary_part, three_part_generator)
from latchiral.expr import build_lattice
from latchiral.lattice import (LatticeError, make_standard, orthogonal_complement,
                               saturation, signature, weight_vector)
from latchiral.shortvec import short_vectors, vectors_of_norm
from props import polarization_check


@pytest.mark.parametrize("name, det, roots", [
    ("A1", 2, 2), ("A2", 3, 6), ("A4", 5, 20), ("D4", 4, 24), ("D5", 4, 40),
    ("E6", 3, 72), ("E7", 2, 126), ("E8", 1, 240),
])
def test_root_lattices(name, det, roots):
    L = make_standard(name)
    assert L.det == det
    assert signature(L) == (L.rank, 0)
    assert len(vectors_of_norm(L.gram, [2])) == roots


def test_block_conventions():
    D4 = make_standard("D4")
    # d1 is the central node
    assert [D4.gram[0][j] for j in range(4)] == [2, -1, -1, -1]
    assert make_standard("U", 2).gram == ((0, 2), (2, 0))
    assert make_standard("-A1").gram == ((-2,),)
    assert make_standard("<6>").labels == ("g",) or list(make_standard("<6>").labels) == ["g"]
    E8 = make_standard("E8")
    # Bourbaki: e2 hangs off e4
    assert [j for j in range(8) if E8.gram[1][j] == -1] == [3]


def test_direct_sum_primes_repeated_labels():
    L = build_lattice("U+2E8")
    assert "e1'" in L.labels and "e8'" in L.labels
    assert signature(L) == (17, 1)
    assert L.det == -1


@pytest.mark.parametrize("bad", ["<3>", "<0>", "D2", "E9", "F4", "U3"])
def test_bad_blocks(bad):
    with pytest.raises(LatticeError):
        make_standard(bad)


def test_weight_vectors_of_e8():
    L = build_lattice("E8")
    w8 = weight_vector(L, 0, "e8*")
    assert tuple(w8.coords) == (2, 3, 4, 6, 5, 4, 3, 2)
    assert L.norm(w8.coords) == 2
    assert L.norm(weight_vector(L, 0, "e1*").coords) == 4


def test_orthogonal_complement_and_saturation():
    L = build_lattice("U+A2+E8")
    e = [0] * L.rank
    e[4 + 6] = 1  # e7
    comp, basis = orthogonal_complement(L, [e])
    assert comp.rank == L.rank - 1
    assert all(L.ip(b, e) == 0 for b in basis)
    assert abs(comp.det) == abs(L.det) * 2
    assert saturation(L, [e]).is_primitive
    twice = [2 * x for x in e]
    s = saturation(L, [twice])
    assert not s.is_primitive and s.index == 2


def test_degenerate_gram_rejected():
    with pytest.raises(LatticeError):
        orthogonal_complement(build_lattice("U"), [[1, 0]])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3),
       st.integers(0, 30))
def test_short_vectors_against_brute_force(B, bound):
    G = linalg.matmul(B, linalg.transpose(B))
    if linalg.det(G) == 0:
        return
    got = sorted(short_vectors(G, bound))
    # brute force in a box large enough for the bound
    inv = sympy.Matrix(G).inv()
    box = [int(sympy.floor(sympy.sqrt(bound * inv[i, i]))) + 1 for i in range(3)]
    want = sorted(x for x in product(*(range(-b, b + 1) for b in box))
                  if linalg.bilinear(G, x, x) <= bound)
    assert got == want


def test_short_vectors_with_empty_fibres_terminate():
    # centres that fall strictly between integers used to loop
    G = [[Fraction(5, 2), Fraction(1, 2)], [Fraction(1, 2), Fraction(5, 2)]]
    assert sorted(short_vectors(G, Fraction(1, 10))) == [(0, 0)]


def test_discriminant_of_known_lattices():
    assert discriminant_group(build_lattice("-A1+<6>")).orders == [2, 6]
    assert discriminant_group(build_lattice("U+A2")).orders == [3]
    assert discriminant_group(build_lattice("U+E8")).orders == []
    D = discriminant_group(build_lattice("D4"))
    assert D.orders == [2, 2]
    assert sorted(D.q(e) for e in D.elements()) == [0, 1, 1, 1]


def test_class_invariant_preconditions():
    with pytest.raises(DiscriminantError):
        class_invariants(build_lattice("A2"))
    with pytest.raises(DiscriminantError):
        class_invariants(build_lattice("U+A1"))
    with pytest.raises(DiscriminantError):
        class_invariants(build_lattice("U+A4"))
    # the 3-part of -A2 has the opposite form
    with pytest.raises(DiscriminantError):
        class_invariants(build_lattice("U+-A2+E8+E8"))


def test_three_part_generator_is_in_the_dual():
    L = build_lattice("-A1+<6>+E8")
    x = three_part_generator(L)
    assert linalg.is_integral(L.products(x))
    assert not linalg.is_integral(x)
    assert mod2(L.norm(x)) == Fraction(2, 3)


def test_polarization_on_every_table_lattice(table_lattices):
    """q(x + y) - q(x) - q(y) = 2 b(x, y) mod 2, with q taken from lifts."""
    for entry, L in table_lattices:
        checked, bad = polarization_check(discriminant_group(L))
        assert checked and not bad, entry.expr


def test_primary_parts_multiply_to_the_whole(table_lattices):
    for entry, L in table_lattices:
        D = discriminant_group(L)
        D2, D3 = primary_part(D, 2), primary_part(D, 3)
        assert D2.order * D3.order == D.order == abs(L.det)
        assert all(o == 2 for o in D2.orders) and D3.orders == [3]
