"""Integer-lattice algebra for frequency mode sets.

Modes are integer tuples of length 2 or 3.  The subgroup generated by a
mode set is kept as an integer row-echelon basis in Hermite normal form
(columns of the basis matrix form a lower-triangular matrix: each basis
vector leads with a positive pivot, pivot columns strictly increase, and
entries above each pivot are reduced into ``[0, pivot)``).  All arithmetic
is exact; membership and index questions are decided, never approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .ratlinalg import Vec, fvec, invert_matrix, rational_rank

Mode = tuple[int, ...]


def canonical_mode(m: Mode) -> Mode:
    """Sign representative with first nonzero coordinate positive."""
    for x in m:
        if x > 0:
            return tuple(m)
        if x < 0:
            return tuple(-y for y in m)
    return tuple(m)


def check_dim(m: Mode) -> int:
    d = len(m)
    if d not in (2, 3):
        raise ValueError(f"modes must have length 2 or 3, got {d}")
    return d


def wedge2(m: Mode, n: Mode) -> int:
    """2D wedge m1*n2 - m2*n1."""
    if len(m) != 2 or len(n) != 2:
        raise ValueError("wedge2 requires 2-dimensional modes")
    return m[0] * n[1] - m[1] * n[0]


def cross3(a, b):
    """Cross product of two (rational or integer) 3-vectors."""
    if len(a) != 3 or len(b) != 3:
        raise ValueError("cross3 requires 3-vectors")
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def span_dimension(modes) -> int:
    """Rank over the rationals of the mode set."""
    return rational_rank([fvec(m) for m in modes])


def _echelon_insert(basis: list[list[int]], vec: list[int]) -> bool:
    # integer echelon via xgcd row combinations; basis rows sorted by pivot.
    # Returns True iff a row was added (the vector enlarged the span).
    vec = list(vec)
    i = 0
    while True:
        piv = next((j for j, x in enumerate(vec) if x != 0), None)
        if piv is None:
            return False
        while i < len(basis):
            row = basis[i]
            rpiv = next(j for j, x in enumerate(row) if x != 0)
            if rpiv < piv:
                i += 1
                continue
            if rpiv > piv:
                basis.insert(i, vec)
                return True
            a, b = row[piv], vec[piv]
            if b % a == 0:
                q = b // a
                vec = [x - q * y for x, y in zip(vec, row)]
            else:
                g = math.gcd(a, b)
                # x*a + y*b == g
                x, y = _xgcd(a, b)
                new_row = [x * r + y * v for r, v in zip(row, vec)]
                vec = [(-(b // g)) * r + (a // g) * v for r, v in zip(row, vec)]
                basis[i] = new_row
            break
        else:
            basis.append(vec)
            return True


def _xgcd(a: int, b: int) -> tuple[int, int]:
    x, nx, y, ny, g, ng = 1, 0, 0, 1, a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    return x, y


def _hermite_normalize(basis: list[list[int]]) -> list[tuple[int, ...]]:
    for i, row in enumerate(basis):
        piv = next(j for j, x in enumerate(row) if x != 0)
        if row[piv] < 0:
            basis[i] = [-x for x in row]
    # reduce entries above each pivot into [0, pivot); ascending pivot order
    # so later reductions cannot disturb already-reduced pivot columns
    for i, row in enumerate(basis):
        piv = next(j for j, x in enumerate(row) if x != 0)
        p = row[piv]
        for k in range(i):
            q = basis[k][piv] // p
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], row)]
    return [tuple(r) for r in basis]


@dataclass(frozen=True)
class LatticeSubgroup:
    """Subgroup of Z^d in Hermite normal form; index is None when infinite."""

    dim: int
    basis: tuple[Mode, ...]
    rank: int = field(init=False)
    index: int | None = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rank", len(self.basis))
        if self.rank == self.dim:
            idx = 1
            for row in self.basis:
                piv = next(x for x in row if x != 0)
                idx *= abs(piv)
            object.__setattr__(self, "index", idx)
        else:
            object.__setattr__(self, "index", None)

    def contains(self, m: Mode) -> bool:
        return contains(self, m)


def subgroup_generated(modes) -> LatticeSubgroup:
    """Hermite-normal-form basis of the subgroup generated by the modes."""
    modes = list(modes)
    if not modes:
        raise ValueError("cannot generate a subgroup from an empty mode set")
    d = check_dim(modes[0])
    if any(len(m) != d for m in modes):
        raise ValueError("modes of mixed dimension")
    basis: list[list[int]] = []
    for m in modes:
        _echelon_insert(basis, list(m))
    return LatticeSubgroup(d, tuple(_hermite_normalize(basis)))


def contains(g: LatticeSubgroup, m: Mode) -> bool:
    """Exact membership of m in the subgroup, by forward substitution."""
    if len(m) != g.dim:
        raise ValueError("mode dimension does not match subgroup dimension")
    v = list(m)
    for row in g.basis:
        piv = next(j for j, x in enumerate(row) if x != 0)
        if v[piv] % row[piv] != 0:
            return False
        q = v[piv] // row[piv]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return all(x == 0 for x in v)


@dataclass(frozen=True)
class DualGroup:
    """Dual of a full-rank subgroup: basis of Gamma* and Gamma*/Z^d reps."""

    dim: int
    basis: tuple[Vec, ...]
    quotient_reps: tuple[Vec, ...]


def dual_group(g: LatticeSubgroup) -> DualGroup:
    """Dual lattice as inverse-transpose columns, quotient enumerated exactly."""
    if g.rank != g.dim:
        raise ValueError("dual group of this form requires a full-rank subgroup")
    d = g.dim
    # A has the basis vectors as columns; Gamma* = (A^T)^{-1} Z^d
    a_t = [list(row) for row in g.basis]  # rows of A^T are the basis vectors
    a_t_inv = invert_matrix(a_t)
    dual_basis = tuple(tuple(a_t_inv[i][j] for i in range(d)) for j in range(d))
    # cosets of A^T Z^d in Z^d, from the HNF of the columns of A^T
    cols = [[a_t[i][j] for i in range(d)] for j in range(d)]
    col_lattice: list[list[int]] = []
    for c in cols:
        _echelon_insert(col_lattice, list(c))
    col_basis = _hermite_normalize(col_lattice)
    pivots = []
    for row in col_basis:
        piv = next(x for x in row if x != 0)
        pivots.append(piv)
    reps = []
    for combo in product(*(range(p) for p in pivots)):
        k = [Fraction(0)] * d
        for j, row in enumerate(col_basis):
            pivcol = next(i for i, x in enumerate(row) if x != 0)
            k[pivcol] += combo[j]
        x = [sum(a_t_inv[i][j] * k[j] for j in range(d)) for i in range(d)]
        reps.append(tuple(xi - math.floor(xi) for xi in x))
    reps.sort()
    return DualGroup(d, dual_basis, tuple(reps))


def gcd_wedge_criterion(modes) -> bool:
    """True iff the wedges of the mode set have greatest common divisor 1."""
    modes = [tuple(m) for m in modes]
    if any(len(m) != 2 for m in modes):
        raise ValueError("gcd_wedge_criterion is a T^2 test")
    g = 0
    for m, n in combinations(modes, 2):
        g = math.gcd(g, abs(wedge2(m, n)))
    return g == 1


def _in_box(m: Mode, box: int) -> bool:
    return all(abs(x) <= box for x in m)


def ik_closure(modes, box: int) -> set[Mode]:
    """Fixed point of repeated mode addition m+n over non-colinear pairs.

    Both signs of every mode are kept and the iteration is intersected with
    the cube |m_i| <= box at every sweep, which truncates the unbounded
    iteration but guarantees termination.
    """
    modes = [tuple(m) for m in modes]
    if any(len(m) != 2 for m in modes):
        raise ValueError("ik_closure is a T^2 iteration")
    current: set[Mode] = set()
    for m in modes:
        if _in_box(m, box):
            current.add(m)
            current.add(tuple(-x for x in m))
    while True:
        fresh = set()
        items = sorted(current)
        for i, m in enumerate(items):
            for n in items[i:]:
                if wedge2(m, n) == 0:
                    continue
                s = (m[0] + n[0], m[1] + n[1])
                if _in_box(s, box) and s not in current:
                    fresh.add(s)
                    fresh.add((-s[0], -s[1]))
        if not fresh:
            return current
        current |= fresh
