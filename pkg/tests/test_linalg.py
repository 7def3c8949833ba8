from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from latchiral import linalg


def square(n, lo=-6, hi=6):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n)


matrices = st.integers(1, 6).flatmap(square)


def rect(draw_rows, draw_cols):
    return st.integers(draw_rows[0], draw_rows[1]).flatmap(
        lambda r: st.integers(draw_cols[0], draw_cols[1]).flatmap(
            lambda c: st.lists(st.lists(st.integers(-5, 5), min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_det_matches_sympy(A):
    assert linalg.det(A) == sympy.Matrix(A).det()


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_inverse_and_solve(A):
    if linalg.det(A) == 0:
        return
    Ainv = linalg.inverse(A)
    assert linalg.matmul(A, Ainv) == linalg.identity(len(A))
    b = list(range(1, len(A) + 1))
    x = linalg.solve(A, b)
    assert [Fraction(v) for v in linalg.matvec(A, x)] == [Fraction(v) for v in b]


@settings(max_examples=150, deadline=None)
@given(rect((1, 5), (1, 6)))
def test_rank_and_nullspace(A):
    assert linalg.rank(A) == sympy.Matrix(A).rank()
    N = linalg.nullspace(A)
    assert len(N) == len(A[0]) - linalg.rank(A)
    for v in N:
        assert all(x == 0 for x in linalg.matvec(A, v))


@settings(max_examples=150, deadline=None)
@given(rect((1, 4), (1, 6)))
def test_integer_kernel_is_saturated(A):
    K = linalg.integer_kernel(A)
    n = len(A[0])
    assert len(K) == n - linalg.rank(A)
    for v in K:
        assert all(x == 0 for x in linalg.matvec(A, v))
    if K:
        # a saturated basis has coprime maximal minors
        M = sympy.Matrix(K)
        from itertools import combinations
        from math import gcd
        g = 0
        for cols in combinations(range(n), len(K)):
            g = gcd(g, int(M.extract(list(range(len(K))), list(cols)).det()))
        assert g == 1


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_smith_normal_form(A):
    d, U, V = linalg.smith_normal_form(A)
    n = len(A)
    D = linalg.matmul(linalg.matmul(U, A), V)
    assert D == [[d[i] if i == j else 0 for j in range(n)] for i in range(n)]
    assert abs(linalg.det(U)) == 1 and abs(linalg.det(V)) == 1
    assert all(x >= 0 for x in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) if a == 0 else b % a == 0
    # product of invariant factors is |det|
    prod = 1
    for x in d:
        prod *= x
    assert prod == abs(linalg.det(A))


@settings(max_examples=100, deadline=None)
@given(rect((1, 5), (1, 5)))
def test_row_hnf_spans_the_same_lattice(rows):
    H = linalg.row_hnf_basis(rows)
    assert len(H) == linalg.rank(rows)
    if not H:
        return
    for r in rows:
        # every input row is an integer combination of H
        x = _solve_in_span(H, r)
        assert x is not None and linalg.is_integral(x)
    # and H adds nothing: reducing rows + H gives H back
    assert linalg.row_hnf_basis(list(rows) + H) == H


def _solve_in_span(H, r):
    M = sympy.Matrix(H).T
    sol, params = M.gauss_jordan_solve(sympy.Matrix(r))
    sol = sol.subs({t: 0 for t in params})
    return [Fraction(int(sympy.Rational(x).p), int(sympy.Rational(x).q)) for x in sol]


def test_ldl_inertia_of_known_forms():
    assert linalg.inertia([[0, 1], [1, 0]]) == (1, 1, 0)
    assert linalg.inertia([[2, -1], [-1, 2]]) == (2, 0, 0)
    assert linalg.inertia([[0, 0], [0, 0]]) == (0, 0, 2)
    assert linalg.inertia([[0, 1, 0], [1, 0, 0], [0, 0, -2]]) == (1, 2, 0)


@settings(max_examples=100, deadline=None)
@given(square(4, -3, 3))
def test_inertia_matches_eigenvalue_signs(B):
    S = [[B[i][j] + B[j][i] for j in range(4)] for i in range(4)]
    ev = sympy.Matrix(S).eigenvals()
    plus = sum(m for e, m in ev.items() if sympy.re(sympy.N(e, 50)) > 1e-30)
    minus = sum(m for e, m in ev.items() if sympy.re(sympy.N(e, 50)) < -1e-30)
    p, q, z = linalg.inertia(S)
    assert (p, q) == (plus, minus)


def test_lll_transform_is_unimodular_and_reduces():
    G = [[10, 7, 3], [7, 6, 2], [3, 2, 4]]
    T = linalg.lll_gram(G)
    assert abs(linalg.det(T)) == 1
    R = linalg.matmul(linalg.matmul(T, G), linalg.transpose(T))
    assert min(R[i][i] for i in range(3)) <= min(G[i][i] for i in range(3))


def test_congruence_sublattice():
    A = [[1, 2, 3]]
    B = linalg.congruence_sublattice(A, 3)
    assert abs(linalg.det(B)) == 3
    for y in B:
        assert sum(a * b for a, b in zip(A[0], y)) % 3 == 0
