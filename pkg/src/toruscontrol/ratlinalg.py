"""Exact linear algebra over the rationals for small dense vectors.

Everything here works on tuples of ``fractions.Fraction`` and keeps the
reduced row-echelon form (RREF) as the canonical representation of a
subspace, so two subspaces are equal iff their row lists compare equal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def fvec(xs: Iterable) -> Vec:
    return tuple(as_fraction(x) for x in xs)


def dot(a: Sequence, b: Sequence) -> Fraction:
    assert len(a) == len(b)
    return sum((as_fraction(x) * as_fraction(y) for x, y in zip(a, b)), Fraction(0))


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(c, a: Vec) -> Vec:
    c = as_fraction(c)
    return tuple(c * x for x in a)


def is_zero_vec(a: Sequence) -> bool:
    return all(x == 0 for x in a)


class RationalSpan:
    """Incremental span of rational vectors, kept in RREF.

    Rows are monic (pivot 1) with zeros above and below each pivot, ordered
    by pivot column, which makes the basis canonical for the subspace.
    """

    def __init__(self, width: int):
        self.width = width
        self.rows: list[Vec] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _residual(self, vec: Vec) -> Vec:
        v = list(vec)
        for piv, row in zip(self.pivots, self.rows):
            c = v[piv]
            if c != 0:
                for j in range(piv, self.width):
                    v[j] -= c * row[j]
        return tuple(v)

    def contains(self, vec: Sequence) -> bool:
        return is_zero_vec(self._residual(fvec(vec)))

    def add(self, vec: Sequence) -> bool:
        """Insert a vector; return True iff it enlarged the span."""
        v = self._residual(fvec(vec))
        piv = next((j for j, x in enumerate(v) if x != 0), None)
        if piv is None:
            return False
        v = vec_scale(1 / v[piv], v)
        # eliminate the new pivot from existing rows, keep RREF shape
        for i, row in enumerate(self.rows):
            c = row[piv]
            if c != 0:
                self.rows[i] = vec_sub(row, vec_scale(c, v))
        k = next((i for i, p in enumerate(self.pivots) if p > piv), len(self.pivots))
        self.rows.insert(k, v)
        self.pivots.insert(k, piv)
        return True

    def copy(self) -> "RationalSpan":
        other = RationalSpan(self.width)
        other.rows = list(self.rows)
        other.pivots = list(self.pivots)
        return other


def rational_rank(vectors: Iterable[Sequence]) -> int:
    vecs = [fvec(v) for v in vectors]
    if not vecs:
        return 0
    span = RationalSpan(len(vecs[0]))
    for v in vecs:
        span.add(v)
    return span.rank


def span_contains(basis: Iterable[Sequence], vec: Sequence) -> bool:
    vecs = [fvec(v) for v in basis]
    target = fvec(vec)
    span = RationalSpan(len(target))
    for v in vecs:
        span.add(v)
    return span.contains(target)


def same_span(a: Iterable[Sequence], b: Iterable[Sequence], width: int) -> bool:
    sa = RationalSpan(width)
    for v in a:
        sa.add(v)
    sb = RationalSpan(width)
    for v in b:
        sb.add(v)
    return sa.rows == sb.rows


def invert_matrix(rows: Sequence[Sequence]) -> list[Vec]:
    """Inverse of a square rational matrix given as a list of rows."""
    n = len(rows)
    aug = [list(fvec(r)) + [Fraction(i == j) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                c = aug[r][col]
                aug[r] = [x - c * y for x, y in zip(aug[r], aug[col])]
    return [tuple(row[n:]) for row in aug]
