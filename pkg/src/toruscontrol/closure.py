"""Predicted closure of Lie{f + u} versus brute-force Lie generation.

``predicted_closure`` applies the proven case analysis: on T^2 the closure
is the full divergence-free space over the generated mode lattice when the
modes span the plane, and degenerates to the per-mode trig spans of the
stream modes otherwise; on T^3 the full-lattice answer needs both the mode
span and the coefficient span to be three-dimensional, while colinear-mode
or rank-one-coefficient fields keep only per-mode rotational orbits.  Cases
without a theorem are refused as ``unclassified``.

``bruteforce_closure`` generates the algebra directly by iterated exact
brackets inside a frequency box and tabulates the achieved per-mode
coefficient subspaces, giving an independent oracle for the prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .lattice import LatticeSubgroup, Mode, _echelon_insert, canonical_mode, subgroup_generated
from .ratlinalg import RationalSpan, Vec, as_fraction, fvec
from .trigfield import (
    CoeffPair,
    TrigField,
    is_divergence_free,
    mode_perp,
    partial_ad,
    perp_basis_3d,
    single_mode_field,
    trig_field,
)

FULL_LATTICE = "full_lattice"
PLANAR_DEGENERATE = "planar_degenerate"
T3_DEGENERATE = "t3_degenerate"
UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class ClosureDescriptor:
    """Exact membership predicate for the closure of Lie{f + u}."""

    kind: str
    dim: int
    lattice: LatticeSubgroup | None = None  # full_lattice payload
    modes: frozenset[Mode] | None = None  # planar_degenerate payload
    orbits: Mapping[Mode, CoeffPair] | None = None  # t3_degenerate payload


def predicted_closure(f: TrigField) -> ClosureDescriptor:
    """Classify the closure of Lie{f + u | u constant} for the given field."""
    if not is_divergence_free(f):
        raise ValueError("field must be divergence-free")
    if any(c != 0 for c in f.constant):
        raise ValueError("field must be mean-normalized (subtract its mean first)")
    modes = sorted(f.terms)
    if f.dim == 2:
        if not modes:
            return ClosureDescriptor(PLANAR_DEGENERATE, 2, modes=frozenset())
        gamma = subgroup_generated(modes)
        if gamma.rank == 2:
            return ClosureDescriptor(FULL_LATTICE, 2, lattice=gamma)
        return ClosureDescriptor(PLANAR_DEGENERATE, 2, modes=frozenset(modes))
    # T^3 case analysis
    if not modes:
        return ClosureDescriptor(T3_DEGENERATE, 3, orbits={})
    gamma = subgroup_generated(modes)
    coeff_vectors = []
    for a, b in f.terms.values():
        coeff_vectors.append(a)
        coeff_vectors.append(b)
    span_v = RationalSpan(3)
    for v in coeff_vectors:
        span_v.add(v)
    if gamma.rank == 3 and span_v.rank == 3:
        return ClosureDescriptor(FULL_LATTICE, 3, lattice=gamma)
    if gamma.rank == 1 or (gamma.rank == 2 and span_v.rank == 1):
        return ClosureDescriptor(T3_DEGENERATE, 3, orbits=dict(f.terms))
    return ClosureDescriptor(UNCLASSIFIED, 3)


def _orbit_span(pair: CoeffPair) -> RationalSpan:
    # rotational orbit {(alpha a + beta b, -beta a + alpha b)} as a 2d-plane
    d = len(pair.a)
    span = RationalSpan(2 * d)
    span.add(pair.a + pair.b)
    span.add(pair.b + tuple(-x for x in pair.a))
    return span


def membership(c: ClosureDescriptor, g: TrigField) -> bool:
    """Exact membership of a divergence-free field in the described closure."""
    if c.kind == UNCLASSIFIED:
        raise ValueError("membership is undefined for an unclassified closure")
    if g.dim != c.dim:
        raise ValueError("dimension mismatch")
    if not is_divergence_free(g):
        raise ValueError("membership applies to divergence-free fields")
    if c.kind == FULL_LATTICE:
        return all(c.lattice.contains(m) for m in g.terms)
    if c.kind == PLANAR_DEGENERATE:
        allowed = {canonical_mode(m) for m in c.modes}
        return all(m in allowed for m in g.terms)
    # t3_degenerate: per-mode coefficient pair must lie in the rotation orbit
    orbits = {canonical_mode(m): pair for m, pair in c.orbits.items()}
    for m, (a, b) in g.terms.items():
        if m not in orbits:
            return False
        if not _orbit_span(orbits[m]).contains(a + b):
            return False
    return True


# -- mode isolation -----------------------------------------------------------


def isolate_mode(f: TrigField, m0: Mode) -> TrigField:
    """Ad-polynomial filter returning the component of f at modes +-m0.

    Per axis, factors (v^2 + ad^2) with v ranging over the other mode
    magnitudes rescale every term by (v^2 - m_axis^2) and so cancel all
    magnitudes different from |m0| (ad is the coordinate derivative, with
    ad^2 acting as -m_axis^2).  Sign patterns are then separated by the
    projections (m0_a m0_b - ad_a ad_b) / (2 m0_a m0_b) over axis pairs,
    and the exact nonzero product of the cancellation constants is divided
    out.  The result equals the direct projection of f onto +-m0.
    """
    m0 = tuple(int(x) for x in m0)
    canon = canonical_mode(m0)
    if canon not in f.terms:
        raise ValueError(f"mode {m0} is not present in the field")
    work = TrigField(f.dim, dict(f.terms), tuple(Fraction(0) for _ in range(f.dim)))
    gamma = Fraction(1)
    for axis in range(f.dim):
        magnitudes = sorted({abs(m[axis]) for m in f.terms} - {abs(m0[axis])})
        for v in magnitudes:
            # (v^2 + ad_axis^2) scales a mode m by (v^2 - m_axis^2)
            work = work.scale(v * v) + partial_ad(work, axis, 2)
            gamma *= Fraction(v * v - m0[axis] * m0[axis])
    nonzero_axes = [i for i in range(f.dim) if m0[i] != 0]
    for a, b in zip(nonzero_axes, nonzero_axes[1:]):
        # (m0_a m0_b - ad_a ad_b) / (2 m0_a m0_b): kills opposite sign pairs
        mixed = partial_ad(partial_ad(work, a, 1), b, 1)
        work = (work.scale(m0[a] * m0[b]) - mixed).scale(Fraction(1, 2 * m0[a] * m0[b]))
    return work.scale(1 / gamma)


def project_mode(f: TrigField, m0: Mode) -> TrigField:
    """Direct projection of f onto the +-m0 component (test oracle)."""
    canon = canonical_mode(m0)
    pair = f.terms.get(canon)
    if pair is None:
        return trig_field(f.dim)
    return single_mode_field(canon, pair.a, pair.b)


# -- brute-force Lie generation ------------------------------------------------


def _divfree_dim(d: int) -> int:
    return 2 * (d - 1)


@dataclass
class ModeSpanTable:
    """Achieved per-mode coefficient subspaces inside the inner box.

    Every tabulated basis pair (a, b) is an exact member of the generated
    Lie algebra as the pure field a cos<m,.> + b sin<m,.>; the constants
    subspace collects the achieved translation directions.
    """

    dim: int
    box: int
    table: dict[Mode, list[Vec]] = field(default_factory=dict)  # mode -> rows in Q^{2d}
    constants: list[Vec] = field(default_factory=list)
    stabilized: bool = True

    def basis_fields(self) -> list[TrigField]:
        out = []
        for c in self.constants:
            out.append(trig_field(self.dim, constant=c))
        for m in sorted(self.table):
            for row in self.table[m]:
                out.append(single_mode_field(m, row[: self.dim], row[self.dim:]))
        return out

    def mode_rank(self, m: Mode) -> int:
        return len(self.table.get(canonical_mode(m), ()))


_IntPair = tuple[tuple[int, ...], tuple[int, ...]]


def _primitive(values: tuple[int, ...]) -> tuple[int, ...] | None:
    g = 0
    for v in values:
        g = math.gcd(g, abs(v))
    if g == 0:
        return None
    return values if g == 1 else tuple(v // g for v in values)


def _int_pair_from_rational(a, b) -> _IntPair | None:
    """Scale a rational coefficient pair to a primitive integer pair."""
    denom = 1
    for x in tuple(a) + tuple(b):
        x = as_fraction(x)
        denom = denom * x.denominator // math.gcd(denom, x.denominator)
    flat = tuple(int(as_fraction(x) * denom) for x in tuple(a) + tuple(b))
    prim = _primitive(flat)
    if prim is None:
        return None
    d = len(tuple(a))
    return prim[:d], prim[d:]


def _int_term_bracket(dim: int, m: Mode, pm: _IntPair, n: Mode, pn: _IntPair):
    """Twice the bracket of pure integer terms (the 1/2 factors are dropped;
    members are only ever used up to scale).  Mirrors the product-to-sum
    kernel of ``trigfield.bracket`` and is pinned to it by tests."""
    terms: dict[Mode, tuple[list[int], list[int]]] = {}
    const = [0] * dim

    def add(mode, a=None, b=None):
        if not any(mode):
            if a is not None:
                for i, x in enumerate(a):
                    const[i] += x
            return
        canon = canonical_mode(mode)
        sign = 1 if canon == mode else -1
        slot = terms.setdefault(canon, ([0] * dim, [0] * dim))
        if a is not None:
            for i, x in enumerate(a):
                slot[0][i] += x
        if b is not None:
            for i, x in enumerate(b):
                slot[1][i] += sign * x

    def products(nn, c, d, mm_, sa, sb, sign):
        mp = tuple(x + y for x, y in zip(nn, mm_))
        mm = tuple(x - y for x, y in zip(nn, mm_))
        if sa:
            ha = sign * sa
            add(mp, b=[-ha * x for x in c])
            add(mm, b=[-ha * x for x in c])
            add(mm, a=[ha * x for x in d])
            add(mp, a=[ha * x for x in d])
        if sb:
            hb = sign * sb
            add(mm, a=[-hb * x for x in c])
            add(mp, a=[hb * x for x in c])
            add(mp, b=[hb * x for x in d])
            add(mm, b=[-hb * x for x in d])

    def idot(u, v):
        return sum(x * y for x, y in zip(u, v))

    products(n, pn[0], pn[1], m, idot(n, pm[0]), idot(n, pm[1]), 1)
    products(m, pm[0], pm[1], n, idot(m, pn[0]), idot(m, pn[1]), -1)
    return terms, const


class _GenerationState:
    """Per-mode integer-echelon spans plus the bracket worklist bookkeeping.

    Members are primitive integer coefficient pairs; rescaling a member by
    a nonzero rational keeps it a member, so ranks and spans over Q are
    unchanged while the arithmetic stays fast.
    """

    def __init__(self, dim: int, outer_box: int):
        self.dim = dim
        self.outer_box = outer_box
        self.spans: dict[Mode, list[list[int]]] = {}
        self.members: dict[Mode, list[_IntPair]] = {}
        self.const_rows: list[list[int]] = []
        # watermark of member pairs already bracketed, per canonical mode pair
        self.done: dict[tuple[Mode, Mode], tuple[int, int]] = {}

    def in_box(self, m: Mode) -> bool:
        return all(abs(x) <= self.outer_box for x in m)

    def saturated(self, m: Mode) -> bool:
        return len(self.spans.get(m, ())) >= _divfree_dim(self.dim)

    def insert_constant(self, c) -> bool:
        if len(self.const_rows) >= self.dim:
            return False
        prim = _primitive(tuple(c))
        if prim is None:
            return False
        return _echelon_insert(self.const_rows, list(prim))

    def insert_pair(self, m: Mode, pair: _IntPair) -> bool:
        """Insert a pure-mode member (plus its derivative rotation)."""
        a, b = pair
        assert (
            sum(x * y for x, y in zip(m, a)) == 0
            and sum(x * y for x, y in zip(m, b)) == 0
        ), "non-divergence-free term in generation"
        cap = _divfree_dim(self.dim)
        rows = self.spans.setdefault(m, [])
        if len(rows) >= cap:
            return False
        mem = self.members.setdefault(m, [])
        grew = False
        for pa, pb in ((a, b), (b, tuple(-x for x in a))):
            if len(rows) >= cap:
                break
            if _echelon_insert(rows, list(pa + pb)):
                mem.append((pa, pb))
                grew = True
        return grew


def _insert_int_result(state: _GenerationState, terms, const) -> bool:
    """Box-discard policy: keep a bracket result only if no live mode leaks."""
    live = []
    for m, (a, b) in terms.items():
        prim = _primitive(tuple(a) + tuple(b))
        if prim is not None:
            live.append((m, (prim[: state.dim], prim[state.dim:])))
    if any(not state.in_box(m) for m, _ in live):
        return False
    grew = state.insert_constant(const)
    for m, pair in live:
        grew |= state.insert_pair(m, pair)
    return grew


def _bracket_new_pairs(state: _GenerationState, m: Mode, n: Mode) -> bool:
    """Bracket member combinations of two modes not yet processed."""
    key = (m, n) if m <= n else (n, m)
    # results live on m+-n only; skip when nothing there can still grow
    # (saturation is monotone, so marking the pair done stays valid)
    useful = False
    for target in (
        tuple(x + y for x, y in zip(m, n)),
        tuple(x - y for x, y in zip(m, n)),
    ):
        if not any(target):
            useful |= len(state.const_rows) < state.dim
        else:
            canon = canonical_mode(target)
            useful |= state.in_box(canon) and not state.saturated(canon)
    em = list(state.members.get(key[0], ()))
    en = list(state.members.get(key[1], ()))
    if not useful:
        state.done[key] = (len(em), len(en))
        return False
    # snapshot: insertions during the loop may append to these lists
    done_i, done_j = state.done.get(key, (0, 0))
    if len(em) <= done_i and len(en) <= done_j:
        return False
    grew = False
    for i, pi in enumerate(em):
        for j, pj in enumerate(en):
            if i < done_i and j < done_j:
                continue
            if key[0] == key[1] and i >= j:
                continue
            terms, const = _int_term_bracket(state.dim, key[0], pi, key[1], pj)
            grew |= _insert_int_result(state, terms, const)
    state.done[key] = (len(em), len(en))
    return grew


def _candidate_sources(state: _GenerationState, target: Mode):
    seen = set()
    for m in sorted(state.members):
        for n in (
            canonical_mode(tuple(t - x for t, x in zip(target, m))),
            canonical_mode(tuple(t + x for t, x in zip(target, m))),
        ):
            if any(n) and n in state.members:
                pair = (m, n) if m <= n else (n, m)
                if pair not in seen:
                    seen.add(pair)
                    yield pair


def bruteforce_closure(
    generators: list[TrigField],
    inner_box: int,
    outer_box: int,
    max_depth: int = 6,
) -> ModeSpanTable:
    """Generate the Lie algebra of the generators inside a frequency box.

    Iterated exact brackets; any bracket whose result touches a mode outside
    the outer box is discarded whole, so the tracked span only ever contains
    true members.  Results are decomposed into pure-mode components (their
    projections are members too, because the ad-polynomial filters behind
    ``isolate_mode`` are themselves Lie operations once the constant fields
    are generators) and inserted into per-mode rational spans together with
    their derivative rotations.  Passes sweep unsaturated target modes in
    shell order until nothing grows or ``max_depth`` passes have run.
    """
    if not generators:
        raise ValueError("need at least one generator")
    dim = generators[0].dim
    if inner_box > outer_box:
        raise ValueError("inner box must not exceed the outer box")
    state = _GenerationState(dim, outer_box)
    for g in generators:
        if g.dim != dim:
            raise ValueError("generator dimensions differ")
        if not is_divergence_free(g):
            raise ValueError("generators must be divergence-free")
        const = _int_pair_from_rational(g.constant, ())
        if const is not None:
            state.insert_constant(const[0])
        for m, (a, b) in g.terms.items():
            if state.in_box(m):
                pair = _int_pair_from_rational(a, b)
                if pair is not None:
                    state.insert_pair(m, pair)

    all_targets = _boxed_canonical_modes(dim, outer_box)
    stabilized = False
    for _ in range(max_depth):
        grew = False
        for target in all_targets:
            if state.saturated(target):
                continue
            for pair in _candidate_sources(state, target):
                grew |= _bracket_new_pairs(state, *pair)
                if state.saturated(target):
                    break
        if not grew:
            stabilized = True
            break

    def _rref(rows: list[list[int]], width: int) -> list[Vec]:
        span = RationalSpan(width)
        for r in rows:
            span.add(r)
        return list(span.rows)

    table = ModeSpanTable(dim, inner_box, stabilized=stabilized)
    table.constants = _rref(state.const_rows, dim)
    for m, rows in sorted(state.spans.items()):
        if rows and all(abs(x) <= inner_box for x in m):
            table.table[m] = _rref(rows, 2 * dim)
    return table


def _boxed_canonical_modes(dim: int, box: int) -> list[Mode]:
    from itertools import product

    modes = set()
    for m in product(range(-box, box + 1), repeat=dim):
        if any(m):
            modes.add(canonical_mode(m))
    return sorted(modes, key=lambda m: (max(abs(x) for x in m), m))


def table_from_descriptor(c: ClosureDescriptor, box: int) -> ModeSpanTable:
    """Predicted per-mode spans inside a box, as exact RREF bases."""
    if c.kind == UNCLASSIFIED:
        raise ValueError("no predicted table for an unclassified closure")
    d = c.dim
    table = ModeSpanTable(d, box)
    const = RationalSpan(d)
    for i in range(d):
        const.add(tuple(Fraction(i == j) for j in range(d)))
    table.constants = list(const.rows)

    def full_span(m: Mode) -> list[Vec]:
        span = RationalSpan(2 * d)
        if d == 2:
            perp = fvec(mode_perp(m))
            basis = [perp]
        else:
            basis = [fvec(v) for v in perp_basis_3d(m)]
        zero = tuple(Fraction(0) for _ in range(d))
        for v in basis:
            span.add(v + zero)
            span.add(zero + v)
        return list(span.rows)

    if c.kind == FULL_LATTICE:
        for m in _boxed_canonical_modes(d, box):
            if c.lattice.contains(m):
                table.table[m] = full_span(m)
    elif c.kind == PLANAR_DEGENERATE:
        for m in sorted({canonical_mode(x) for x in c.modes}):
            if all(abs(v) <= box for v in m):
                table.table[m] = full_span(m)
    else:  # t3_degenerate
        for m, pair in sorted(c.orbits.items()):
            canon = canonical_mode(m)
            if all(abs(v) <= box for v in canon):
                table.table[canon] = list(_orbit_span(pair).rows)
    return table


def compare_tables(oracle: ModeSpanTable, predicted: ModeSpanTable) -> dict:
    """Per-mode comparison; 'sound' means oracle subspaces never exceed predicted."""
    assert oracle.dim == predicted.dim and oracle.box == predicted.box
    sound = True
    equal = True
    mismatches = []
    modes = sorted(set(oracle.table) | set(predicted.table))
    for m in modes:
        orows = oracle.table.get(m, [])
        prows = predicted.table.get(m, [])
        pred_span = RationalSpan(2 * oracle.dim)
        for r in prows:
            pred_span.add(r)
        if any(not pred_span.contains(r) for r in orows):
            sound = False
            mismatches.append(m)
        elif len(orows) != len(prows):
            equal = False
            mismatches.append(m)
    const_pred = RationalSpan(oracle.dim)
    for r in predicted.constants:
        const_pred.add(r)
    if any(not const_pred.contains(r) for r in oracle.constants):
        sound = False
        mismatches.append((0,) * oracle.dim)
    elif len(oracle.constants) != len(predicted.constants):
        equal = False
        mismatches.append((0,) * oracle.dim)
    return {"sound": sound, "equal": sound and equal, "mismatched_modes": mismatches}
