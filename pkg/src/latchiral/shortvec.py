"""Exact Fincke-Pohst enumeration in positive definite quadratic forms."""
from __future__ import annotations

from math import isqrt
from typing import Iterator, Sequence, Tuple

from gmpy2 import mpq

from . import linalg


def _floor(q) -> int:
    return int(q.numerator // q.denominator)


def _rational_sqrt(q):
    """Exact square root of a non-negative rational, or ``None``."""
    a, b = int(q.numerator), int(q.denominator)
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return mpq(ra, rb)
    return None


def _decompose(Q):
    """``q(x) = sum_i d[i] * (x_i + sum_{j>i} mu[i][j] x_j)^2``."""
    k = len(Q)
    A = [[mpq(x) for x in row] for row in Q]
    d = [mpq(0)] * k
    mu = [[mpq(0)] * k for _ in range(k)]
    for i in range(k):
        piv = A[i][i]
        if piv <= 0:
            raise ValueError("quadratic form is not positive definite")
        d[i] = piv
        for j in range(i + 1, k):
            mu[i][j] = A[i][j] / piv
        for r in range(i + 1, k):
            f = A[r][i]
            if f:
                for c in range(i + 1, k):
                    A[r][c] -= f * mu[i][c]
    return d, mu


class Enumerator:
    """Cached decomposition of a positive definite form for repeated searches."""

    def __init__(self, Q: Sequence[Sequence]):
        self.rank = len(Q)
        self.decomposition = _decompose(Q) if Q else ([], [])

    def __call__(self, bound, exact: bool = False):
        return short_vectors(None, bound, exact, self)


def short_vectors(Q: Sequence[Sequence], bound, exact: bool = False, enumerator=None) -> Iterator[Tuple[int, ...]]:
    """Integer vectors ``x`` with ``x^T Q x <= bound`` (``== bound`` if ``exact``).

    ``Q`` must be positive definite with rational entries.  Both ``x`` and
    ``-x`` are produced; the zero vector is produced when it qualifies.
    A prepared ``Enumerator`` may be passed instead of ``Q``.
    """
    k = enumerator.rank if enumerator is not None else len(Q)
    bound = mpq(bound)
    if k == 0:
        if bound == 0 or (bound > 0 and not exact):
            yield ()
        return
    if bound < 0:
        return
    d, mu = enumerator.decomposition if enumerator is not None else _decompose(Q)
    x = [0] * k

    def rec(i, remaining):
        # centre for coordinate i given x[i+1:]
        s = mpq(0)
        row = mu[i]
        for j in range(i + 1, k):
            if x[j]:
                s += row[j] * x[j]
        z = -s
        r = remaining / d[i]
        if i == 0 and exact:
            root = _rational_sqrt(r)
            if root is None:
                return
            cands = {z + root, z - root}
            for c in sorted(cands):
                if c.denominator == 1:
                    x[0] = int(c)
                    yield tuple(x)
            x[0] = 0
            return
        fl = _floor(z)
        sq = isqrt(_floor(r))
        hi = fl + sq + 1
        while hi > z and (hi - z) ** 2 > r:
            hi -= 1
        lo = fl - sq - 1
        while lo < z and (lo - z) ** 2 > r:
            lo += 1
        for v in range(lo, hi + 1):
            x[i] = v
            t = v - z
            rem = remaining - d[i] * t * t
            if i == 0:
                if not exact or rem == 0:
                    yield tuple(x)
            else:
                yield from rec(i - 1, rem)
        x[i] = 0

    yield from rec(k - 1, bound)


def vectors_of_norm(gram: Sequence[Sequence[int]], norms, reduce: bool = True):
    """All integer vectors whose norm lies in ``norms`` for a positive definite Gram.

    An LLL-reduced basis is used internally; results are returned in the
    original coordinates.
    """
    norms = sorted(set(norms))
    if not norms:
        return []
    n = len(gram)
    T = linalg.lll_gram(gram) if reduce and n > 1 else linalg.identity(n)
    red = linalg.matmul(linalg.matmul(T, gram), linalg.transpose(T))
    out = []
    wanted = set(norms)
    for y in short_vectors(red, max(norms)):
        if not any(y):
            continue
        nrm = linalg.bilinear(red, y, y)
        if nrm in wanted:
            out.append(tuple(sum(y[i] * T[i][j] for i in range(n)) for j in range(n)))
    return out
