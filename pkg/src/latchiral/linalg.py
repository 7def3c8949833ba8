"""Exact integer and rational matrix routines.

Matrices are plain lists of rows.  Entries are Python ``int`` or
``fractions.Fraction``; nothing here ever touches floating point.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*A)] if A else []


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def bilinear(G: Sequence[Sequence], x: Sequence, y: Sequence):
    """Return ``x^T G y``."""
    total = 0
    for xi, row in zip(x, G):
        if xi:
            total += xi * sum(g * yj for g, yj in zip(row, y) if yj)
    return total


def det(A: Sequence[Sequence]) -> int:
    """Determinant of an integer matrix by Bareiss elimination."""
    M = [list(r) for r in A]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def rref(A: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form over the rationals and the pivot columns."""
    M = [[Fraction(x) for x in row] for row in A]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    return len(rref(A)[1])


def inverse(A: Sequence[Sequence]) -> Matrix:
    """Rational inverse; raises ``ZeroDivisionError`` for singular input."""
    n = len(A)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(A)]
    M, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in M[:n]]


def solve(A: Sequence[Sequence], b: Sequence) -> list | None:
    """One rational solution of ``A x = b`` or ``None`` if inconsistent."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    aug = [list(A[i]) + [b[i]] for i in range(rows)]
    M, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = M[i][cols]
    return x


def nullspace(A: Sequence[Sequence]) -> Matrix:
    """Rational basis (list of vectors) of ``{x : A x = 0}``."""
    if not A:
        return []
    cols = len(A[0])
    M, pivots = rref(A)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -M[i][f]
        basis.append(v)
    return basis


def is_integral(x) -> bool:
    if isinstance(x, (list, tuple)):
        return all(is_integral(y) for y in x)
    return Fraction(x).denominator == 1


def to_int(x):
    if isinstance(x, (list, tuple)):
        return [to_int(y) for y in x]
    f = Fraction(x)
    if f.denominator != 1:
        raise ValueError(f"{x} is not an integer")
    return f.numerator


def lcm_denominators(xs) -> int:
    out = 1
    for x in xs:
        if isinstance(x, (list, tuple)):
            d = lcm_denominators(x)
        else:
            d = Fraction(x).denominator
        out = out * d // gcd(out, d)
    return out


# ---------------------------------------------------------------------------
# Integer normal forms


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_hermite(A: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix, int]:
    """Column echelon form ``H = A U`` with ``U`` unimodular.

    Returns ``(H, U, r)`` where the first ``r`` columns of ``H`` are
    nonzero and the remaining columns are zero, so the last ``n - r``
    columns of ``U`` form a basis of the integer kernel of ``A``.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    H = [list(map(int, row)) for row in A]
    U = identity(n)

    def colop(M, i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for row in M:
            x, y = row[i], row[j]
            row[i] = a * x + b * y
            row[j] = c * x + d * y

    r = 0
    for i in range(m):
        if r == n:
            break
        for j in range(r + 1, n):
            if H[i][j] == 0:
                continue
            a, b = H[i][r], H[i][j]
            g, x, y = _xgcd(a, b)
            colop(H, r, j, x, y, -b // g, a // g)
            colop(U, r, j, x, y, -b // g, a // g)
        if H[i][r] != 0:
            if H[i][r] < 0:
                for M in (H, U):
                    for row in M:
                        row[r] = -row[r]
            r += 1
    return H, U, r


def integer_kernel(A: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    """Basis (list of integer vectors) of ``{z in Z^n : A z = 0}``."""
    if not A:
        n = ncols or 0
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    _, U, r = column_hermite(A)
    n = len(A[0])
    return [[U[i][j] for i in range(n)] for j in range(r, n)]


def row_hnf_basis(vectors: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite basis of the Z-span of ``vectors`` (nonzero rows only)."""
    if not vectors:
        return []
    H, _, r = column_hermite(transpose(vectors))
    return [[H[i][j] for i in range(len(H))] for j in range(r)]


def congruence_sublattice(A: Sequence[Sequence[int]], k: int) -> Matrix:
    """Basis (rows) of ``{y in Z^m : A y = 0 mod k}``."""
    n = len(A)
    m = len(A[0]) if n else 0
    if n == 0 or k == 1:
        return identity(m)
    big = [list(map(int, A[i])) + [k if j == i else 0 for j in range(n)] for i in range(n)]
    ker = integer_kernel(big)
    return row_hnf_basis([v[:m] for v in ker])


def smith_normal_form(A: Sequence[Sequence[int]]) -> Tuple[List[int], Matrix, Matrix]:
    """Smith form of a square integer matrix.

    Returns ``(diag, U, V)`` with ``U A V = diag(diag)`` and ``U, V``
    unimodular; the diagonal is non-negative and each entry divides the
    next.
    """
    n = len(A)
    M = [list(map(int, row)) for row in A]
    U = identity(n)
    V = identity(n)

    def rowop(X, i, j, a, b, c, d):
        ri, rj = X[i], X[j]
        X[i] = [a * x + b * y for x, y in zip(ri, rj)]
        X[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def colop(X, i, j, a, b, c, d):
        for row in X:
            x, y = row[i], row[j]
            row[i] = a * x + b * y
            row[j] = c * x + d * y

    for t in range(n):
        # pivot: smallest nonzero |entry| in the trailing block
        best = None
        for i in range(t, n):
            for j in range(t, n):
                if M[i][j] and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            return [M[i][i] for i in range(n)], U, V
        i, j = best
        if i != t:
            M[t], M[i] = M[i], M[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            colop(M, t, j, 0, 1, 1, 0)
            colop(V, t, j, 0, 1, 1, 0)
        while True:
            # each gcd step keeps or shrinks |M[t][t]|, so this terminates
            for i in range(t + 1, n):
                if M[i][t]:
                    a, b = M[t][t], M[i][t]
                    if b % a == 0:
                        g, x, y = a, 1, 0
                    else:
                        g, x, y = _xgcd(a, b)
                    rowop(M, t, i, x, y, -b // g, a // g)
                    rowop(U, t, i, x, y, -b // g, a // g)
            for j in range(t + 1, n):
                if M[t][j]:
                    a, b = M[t][t], M[t][j]
                    if b % a == 0:
                        g, x, y = a, 1, 0
                    else:
                        g, x, y = _xgcd(a, b)
                    colop(M, t, j, x, y, -b // g, a // g)
                    colop(V, t, j, x, y, -b // g, a // g)
            if any(M[i][t] for i in range(t + 1, n)):
                continue
            # divisibility: fold a non-divisible entry into row t
            piv = M[t][t]
            bad = None
            for i in range(t + 1, n):
                if any(M[i][j] % piv for j in range(t + 1, n)):
                    bad = i
                    break
            if bad is None:
                break
            rowop(M, t, bad, 1, 1, 0, 1)
            rowop(U, t, bad, 1, 1, 0, 1)
        if M[t][t] < 0:
            M[t] = [-x for x in M[t]]
            U[t] = [-x for x in U[t]]
    return [M[i][i] for i in range(n)], U, V


# ---------------------------------------------------------------------------
# Quadratic forms


def ldl_diagonal(G: Sequence[Sequence]) -> List[Fraction]:
    """Diagonal of a rational congruence diagonalization of symmetric ``G``.

    Zero pivots with a nonzero off-diagonal entry are resolved by adding a
    row/column pair, so the returned diagonal has the inertia of ``G``.
    """
    M = [[Fraction(x) for x in row] for row in G]
    n = len(M)
    diag: List[Fraction] = []
    k = 0
    while k < n:
        if M[k][k] == 0:
            j = next((j for j in range(k + 1, n) if M[j][j] != 0), None)
            if j is not None:
                M[k], M[j] = M[j], M[k]
                for row in M:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if M[k][j] != 0), None)
                if j is None:
                    diag.append(Fraction(0))
                    k += 1
                    continue
                # x_k <- x_k + x_j makes the pivot 2 M[k][j] != 0
                M[k] = [a + b for a, b in zip(M[k], M[j])]
                for row in M:
                    row[k] += row[j]
        p = M[k][k]
        diag.append(p)
        for i in range(k + 1, n):
            if M[i][k] != 0:
                f = M[i][k] / p
                M[i] = [a - f * b for a, b in zip(M[i], M[k])]
        for i in range(k + 1, n):
            M[i][k] = Fraction(0)
            M[k][i] = Fraction(0)
        k += 1
    return diag


def inertia(G: Sequence[Sequence]) -> Tuple[int, int, int]:
    """``(n_plus, n_minus, n_zero)`` of a symmetric rational matrix."""
    d = ldl_diagonal(G)
    return (sum(1 for x in d if x > 0), sum(1 for x in d if x < 0), sum(1 for x in d if x == 0))


def is_positive_definite(G: Sequence[Sequence]) -> bool:
    n = len(G)
    return n == 0 or inertia(G)[0] == n


def lll_gram(G: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)) -> Matrix:
    """LLL reduction of a positive definite Gram matrix.

    Returns the unimodular transform ``T`` (rows are the new basis vectors
    written in the old basis), so the reduced Gram matrix is ``T G T^T``.
    """
    n = len(G)
    B = identity(n)
    Gc = [[Fraction(x) for x in row] for row in G]

    def gram(i, j):
        return bilinear(Gc, B[i], B[j])

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = gram(i, j) - sum(mu[j][k] * mu[i][k] * bstar[k] for k in range(j))
                mu[i][j] = s / bstar[j]
            bstar[i] = gram(i, i) - sum(mu[i][k] ** 2 * bstar[k] for k in range(i))
        return mu, bstar

    mu, bstar = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                for l in range(j + 1):
                    mu[k][l] -= q * (mu[j][l] if l < j else 1)
        if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            mu, bstar = gso()
            k = max(k - 1, 1)
    return B
