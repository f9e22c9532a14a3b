"""Exact trigonometric vector fields and scalar polynomials on the torus.

A ``TrigField`` is a finite real sum ``sum_m a_m cos<m,x> + b_m sin<m,x>``
plus a constant vector, with rational coefficient vectors.  Terms are
stored only at canonical modes (first nonzero coordinate positive) using
the identification ``a_{-m} = a_m``, ``b_{-m} = -b_m``, and zero pairs are
pruned, so equal fields compare equal.  The symbolic layer is exact; only
``evaluate``/``jacobian`` convert to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .lattice import Mode, canonical_mode, check_dim
from .ratlinalg import Vec, as_fraction, dot, fvec, rational_rank, vec_add, vec_scale

_HALF_PI_TABLE = {
    Fraction(0): (Fraction(1), Fraction(0)),
    Fraction(1, 2): (Fraction(0), Fraction(1)),
    Fraction(1): (Fraction(-1), Fraction(0)),
    Fraction(3, 2): (Fraction(0), Fraction(-1)),
}


class CoeffPair(NamedTuple):
    a: Vec  # cosine coefficient vector
    b: Vec  # sine coefficient vector


def _zero_vec(d: int) -> Vec:
    return tuple(Fraction(0) for _ in range(d))


class _TermAccumulator:
    """Collects (mode, a, b) contributions into canonical storage."""

    def __init__(self, dim: int):
        self.dim = dim
        self.terms: dict[Mode, tuple[list[Fraction], list[Fraction]]] = {}
        self.constant = [Fraction(0)] * dim

    def add(self, mode: Mode, a=None, b=None) -> None:
        mode = tuple(int(x) for x in mode)
        if all(x == 0 for x in mode):
            if a is not None:
                for i, x in enumerate(a):
                    self.constant[i] += as_fraction(x)
            return  # sin 0 == 0: the b part at mode 0 carries nothing
        canon = canonical_mode(mode)
        sign = 1 if canon == mode else -1
        slot = self.terms.setdefault(canon, ([Fraction(0)] * self.dim, [Fraction(0)] * self.dim))
        if a is not None:
            for i, x in enumerate(a):
                slot[0][i] += as_fraction(x)
        if b is not None:
            for i, x in enumerate(b):
                slot[1][i] += sign * as_fraction(x)

    def build(self) -> "TrigField":
        terms = {}
        for mode, (a, b) in self.terms.items():
            if any(a) or any(b):
                terms[mode] = CoeffPair(tuple(a), tuple(b))
        return TrigField(self.dim, terms, tuple(self.constant))


@dataclass(frozen=True, eq=True)
class TrigField:
    """Immutable divergence-agnostic trig vector field. Use ``trig_field``."""

    dim: int
    terms: Mapping[Mode, CoeffPair]
    constant: Vec

    def __post_init__(self):
        check_dim((0,) * self.dim)

    @property
    def modes(self) -> frozenset[Mode]:
        return frozenset(self.terms)

    def is_zero(self) -> bool:
        return not self.terms and all(x == 0 for x in self.constant)

    # -- exact algebra ------------------------------------------------------

    def __add__(self, other: "TrigField") -> "TrigField":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        acc = _TermAccumulator(self.dim)
        for f in (self, other):
            acc.add((0,) * self.dim, f.constant)
            for m, (a, b) in f.terms.items():
                acc.add(m, a, b)
        return acc.build()

    def __neg__(self) -> "TrigField":
        return self.scale(-1)

    def __sub__(self, other: "TrigField") -> "TrigField":
        return self + (-other)

    def scale(self, c) -> "TrigField":
        c = as_fraction(c)
        acc = _TermAccumulator(self.dim)
        acc.add((0,) * self.dim, vec_scale(c, self.constant))
        for m, (a, b) in self.terms.items():
            acc.add(m, vec_scale(c, a), vec_scale(c, b))
        return acc.build()

    # -- numeric boundary ---------------------------------------------------

    def evaluate(self, x) -> np.ndarray:
        """Float evaluation at points of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(
            np.array([float(c) for c in self.constant]), x.shape
        ).copy()
        for m, (a, b) in self.terms.items():
            phase = x @ np.array(m, dtype=float)
            av = np.array([float(v) for v in a])
            bv = np.array([float(v) for v in b])
            out += np.multiply.outer(np.cos(phase), av) + np.multiply.outer(np.sin(phase), bv)
        return out

    def jacobian(self, x) -> np.ndarray:
        """Float Jacobian Df at points of shape (..., dim) -> (..., dim, dim)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (self.dim,))
        for m, (a, b) in self.terms.items():
            mv = np.array(m, dtype=float)
            phase = x @ mv
            av = np.array([float(v) for v in a])
            bv = np.array([float(v) for v in b])
            coeff = -np.multiply.outer(np.sin(phase), av) + np.multiply.outer(np.cos(phase), bv)
            out += coeff[..., :, None] * mv
        return out


def trig_field(dim: int, terms: Iterable[tuple[Mode, Iterable, Iterable]] = (), constant=None) -> TrigField:
    """Build a TrigField from (mode, a, b) triples; canonicalizes and prunes."""
    acc = _TermAccumulator(dim)
    if constant is not None:
        acc.add((0,) * dim, constant)
    for mode, a, b in terms:
        if len(mode) != dim or len(tuple(a)) != dim or len(tuple(b)) != dim:
            raise ValueError("mode/coefficient length must equal dim")
        acc.add(mode, a, b)
    return acc.build()


def zero_field(dim: int) -> TrigField:
    return trig_field(dim)


def constant_field(c) -> TrigField:
    c = fvec(c)
    return trig_field(len(c), constant=c)


def basis_constant_fields(dim: int) -> list[TrigField]:
    out = []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        out.append(constant_field(e))
    return out


def single_mode_field(mode: Mode, a, b) -> TrigField:
    return trig_field(len(mode), [(mode, a, b)])


# -- scalar trig polynomials (stream functions, divergences) ----------------


@dataclass(frozen=True, eq=True)
class TrigScalar:
    """Finite real scalar trig sum; stream functions are the d=2 case."""

    dim: int
    terms: Mapping[Mode, tuple[Fraction, Fraction]]  # mode -> (cos, sin) coeffs
    constant: Fraction = Fraction(0)

    def is_zero(self) -> bool:
        return not self.terms and self.constant == 0

    def __add__(self, other: "TrigScalar") -> "TrigScalar":
        return trig_scalar(
            self.dim,
            list(self.terms.items()) + list(other.terms.items()),
            self.constant + other.constant,
        )

    def __neg__(self) -> "TrigScalar":
        return self.scale(-1)

    def __sub__(self, other: "TrigScalar") -> "TrigScalar":
        return self + (-other)

    def scale(self, c) -> "TrigScalar":
        c = as_fraction(c)
        return trig_scalar(
            self.dim,
            [(m, (c * p, c * q)) for m, (p, q) in self.terms.items()],
            c * self.constant,
        )

    def deriv(self, axis: int) -> "TrigScalar":
        items = []
        for m, (p, q) in self.terms.items():
            k = m[axis]
            items.append((m, (k * q, -k * p)))
        return trig_scalar(self.dim, items)

    def mul(self, other: "TrigScalar") -> "TrigScalar":
        """Exact product expanded to canonical terms via product-to-sum."""
        items: list[tuple[Mode, tuple[Fraction, Fraction]]] = []
        half = Fraction(1, 2)
        items.append(((0,) * self.dim, (self.constant * other.constant, Fraction(0))))
        for m, (p, q) in self.terms.items():
            items.append((m, (other.constant * p, other.constant * q)))
        for n, (r, s) in other.terms.items():
            items.append((n, (self.constant * r, self.constant * s)))
        for m, (p, q) in self.terms.items():
            for n, (r, s) in other.terms.items():
                mp = tuple(x + y for x, y in zip(m, n))
                mm = tuple(x - y for x, y in zip(m, n))
                # cos*cos, sin*sin -> cos(m-n) +- cos(m+n)
                items.append((mm, (half * (p * r + q * s), Fraction(0))))
                items.append((mp, (half * (p * r - q * s), Fraction(0))))
                # sin*cos, cos*sin -> sin(m+n) +- sin(m-n)
                items.append((mp, (Fraction(0), half * (q * r + p * s))))
                items.append((mm, (Fraction(0), half * (q * r - p * s))))
        return trig_scalar(self.dim, items)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[:-1], float(self.constant))
        for m, (p, q) in self.terms.items():
            phase = x @ np.array(m, dtype=float)
            out = out + float(p) * np.cos(phase) + float(q) * np.sin(phase)
        return out


def trig_scalar(dim: int, items=(), constant=0) -> TrigScalar:
    acc: dict[Mode, list[Fraction]] = {}
    const = as_fraction(constant)
    for mode, (p, q) in items:
        mode = tuple(int(x) for x in mode)
        p, q = as_fraction(p), as_fraction(q)
        if all(x == 0 for x in mode):
            const += p  # sin 0 == 0
            continue
        canon = canonical_mode(mode)
        sign = 1 if canon == mode else -1
        slot = acc.setdefault(canon, [Fraction(0), Fraction(0)])
        slot[0] += p
        slot[1] += sign * q
    terms = {m: (p, q) for m, (p, q) in acc.items() if p != 0 or q != 0}
    return TrigScalar(dim, terms, const)


StreamFunction = TrigScalar  # stream functions are scalar trig polynomials on T^2


# -- operations on fields ----------------------------------------------------


def translate_exact(f: TrigField, theta_over_pi) -> TrigField:
    """Exact translation by theta = pi * theta_over_pi (rational entries).

    Requires every stored mode to see a phase that is a multiple of pi/2,
    so that cos<m,theta> and sin<m,theta> are exactly rational.
    """
    t = fvec(theta_over_pi)
    if len(t) != f.dim:
        raise ValueError("translation vector dimension mismatch")
    acc = _TermAccumulator(f.dim)
    acc.add((0,) * f.dim, f.constant)
    for m, (a, b) in f.terms.items():
        phase = sum((x * y for x, y in zip(m, t)), Fraction(0)) % 2
        key = phase if phase in _HALF_PI_TABLE else None
        if key is None:
            raise ValueError(
                f"phase {phase}*pi at mode {m} has irrational cos/sin; use translate()"
            )
        c, s = _HALF_PI_TABLE[key]
        acc.add(m, vec_add(vec_scale(c, a), vec_scale(s, b)),
                vec_add(vec_scale(c, b), vec_scale(-s, a)))
    return acc.build()


def translate(f: TrigField, theta) -> TrigField:
    """Floating translation; coefficients are exact images of float cos/sin."""
    theta = [float(x) for x in theta]
    if len(theta) != f.dim:
        raise ValueError("translation vector dimension mismatch")
    acc = _TermAccumulator(f.dim)
    acc.add((0,) * f.dim, f.constant)
    for m, (a, b) in f.terms.items():
        phase = sum(x * y for x, y in zip(m, theta))
        c, s = Fraction(math.cos(phase)), Fraction(math.sin(phase))
        acc.add(m, vec_add(vec_scale(c, a), vec_scale(s, b)),
                vec_add(vec_scale(c, b), vec_scale(-s, a)))
    return acc.build()


def partial_ad(f: TrigField, axis: int, k: int = 1) -> TrigField:
    """k-fold coordinate derivative along an axis; constants are annihilated."""
    if not 0 <= axis < f.dim:
        raise ValueError("axis out of range")
    if k < 0:
        raise ValueError("order must be non-negative")
    if k == 0:
        return f
    terms = {}
    for m, (a, b) in f.terms.items():
        c = m[axis]
        a2, b2 = a, b
        for _ in range(k):
            a2, b2 = vec_scale(c, b2), vec_scale(-c, a2)
        if any(a2) or any(b2):
            terms[m] = CoeffPair(a2, b2)
    return TrigField(f.dim, terms, _zero_vec(f.dim))


_HALF = Fraction(1, 2)


def _add_derivative_products(acc, n, c, d, m, sa, sb, sign):
    """sign * (-c sin<n> + d cos<n>) (sa cos<m> + sb sin<m>) into acc.

    This is the single product-to-sum kernel behind every bracket path.
    """
    mp = tuple(x + y for x, y in zip(n, m))
    mm = tuple(x - y for x, y in zip(n, m))
    if sa != 0:
        ha = sign * _HALF * sa
        # -c sin<n>cos<m> = -c/2 (sin(n+m) + sin(n-m))
        acc.add(mp, b=vec_scale(-ha, c))
        acc.add(mm, b=vec_scale(-ha, c))
        # d cos<n>cos<m> = d/2 (cos(n-m) + cos(n+m))
        acc.add(mm, a=vec_scale(ha, d))
        acc.add(mp, a=vec_scale(ha, d))
    if sb != 0:
        hb = sign * _HALF * sb
        # -c sin<n>sin<m> = -c/2 (cos(n-m) - cos(n+m))
        acc.add(mm, a=vec_scale(-hb, c))
        acc.add(mp, a=vec_scale(hb, c))
        # d cos<n>sin<m> = d/2 (sin(n+m) - sin(n-m))
        acc.add(mp, b=vec_scale(hb, d))
        acc.add(mm, b=vec_scale(-hb, d))


def _directional(g: TrigField, f: TrigField, acc: _TermAccumulator, sign) -> None:
    """sign * (Dg)f expanded by product-to-sum into the accumulator."""
    for n, (c, d) in g.terms.items():
        # Dg contributes (-c sin<n> + d cos<n>) <n, .>
        s0 = sign * dot(n, f.constant)
        if s0 != 0:
            acc.add(n, vec_scale(s0, d), vec_scale(-s0, c))
        for m, (a, b) in f.terms.items():
            sa = dot(n, a)  # <n, a_m>, multiplies cos<m>
            sb = dot(n, b)  # <n, b_m>, multiplies sin<m>
            _add_derivative_products(acc, n, c, d, m, sa, sb, sign)


def bracket(f: TrigField, g: TrigField) -> TrigField:
    """Exact Lie bracket [f, g] = (Dg)f - (Df)g."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    acc = _TermAccumulator(f.dim)
    _directional(g, f, acc, 1)
    _directional(f, g, acc, -1)
    return acc.build()


def bracket_term_pair(dim: int, m: Mode, pm: CoeffPair, n: Mode, pn: CoeffPair) -> _TermAccumulator:
    """Bracket of two pure single-mode terms, left as a raw accumulator.

    Same kernel as ``bracket``; avoids field construction in hot loops.
    """
    acc = _TermAccumulator(dim)
    _add_derivative_products(acc, n, pn.a, pn.b, m, dot(n, pm.a), dot(n, pm.b), 1)
    _add_derivative_products(acc, m, pm.a, pm.b, n, dot(m, pn.a), dot(m, pn.b), -1)
    return acc


def divergence(f: TrigField) -> TrigScalar:
    items = []
    for m, (a, b) in f.terms.items():
        da = dot(m, a)
        db = dot(m, b)
        items.append((m, (db, -da)))
    return trig_scalar(f.dim, items)


def is_divergence_free(f: TrigField) -> bool:
    return all(dot(m, a) == 0 and dot(m, b) == 0 for m, (a, b) in f.terms.items())


def mean(f: TrigField) -> Vec:
    """Torus average: nonzero modes integrate away, only the constant stays."""
    return f.constant


def mean_normalized(f: TrigField) -> TrigField:
    return TrigField(f.dim, dict(f.terms), _zero_vec(f.dim))


def mode_perp(m: Mode) -> Mode:
    """The 2D rotation (-m2, m1) spanning m-perp."""
    if len(m) != 2:
        raise ValueError("mode_perp is the T^2 rotation")
    return (-m[1], m[0])


def perp_basis_3d(m: Mode) -> tuple[Mode, Mode]:
    """Deterministic integer basis of m-perp in Z^3-span terms."""
    from .lattice import cross3

    if len(m) != 3 or all(x == 0 for x in m):
        raise ValueError("need a nonzero 3-dimensional mode")
    for k in range(3):
        e = tuple(1 if i == k else 0 for i in range(3))
        b1 = cross3(m, e)
        if any(b1):
            b2 = cross3(m, b1)
            g1 = math.gcd(*[abs(x) for x in b1])
            g2 = math.gcd(*[abs(x) for x in b2])
            return tuple(x // g1 for x in b1), tuple(x // g2 for x in b2)
    raise AssertionError("unreachable")


def from_stream(h: TrigScalar) -> TrigField:
    """Hamiltonian field (-dh/dy, dh/dx) of a T^2 stream function."""
    if h.dim != 2:
        raise ValueError("stream functions live on T^2")
    items = []
    for m, (p, q) in h.terms.items():
        perp = mode_perp(m)
        a = vec_scale(q, fvec(perp))
        b = vec_scale(-p, fvec(perp))
        items.append((m, a, b))
    return trig_field(2, items)


def poisson(h1: TrigScalar, h2: TrigScalar) -> TrigScalar:
    """Poisson bracket {h1, h2} = h1_x h2_y - h1_y h2_x, exact."""
    if h1.dim != 2 or h2.dim != 2:
        raise ValueError("poisson bracket is the T^2 operation")
    return h1.deriv(0).mul(h2.deriv(1)) - h1.deriv(1).mul(h2.deriv(0))


def hamiltonian_part(f: TrigField) -> tuple[Vec, TrigScalar]:
    """Split a divergence-free T^2 field as constant + Hamiltonian part."""
    if f.dim != 2:
        raise ValueError("hamiltonian_part is the T^2 decomposition")
    items = []
    for m, (a, b) in f.terms.items():
        perp = fvec(mode_perp(m))
        norm2 = dot(perp, perp)
        q = dot(a, perp) / norm2
        p = -dot(b, perp) / norm2
        if vec_scale(q, perp) != a or vec_scale(-p, perp) != b:
            raise ValueError("field is not divergence-free")
        items.append((m, (p, q)))
    return f.constant, trig_scalar(2, items)


# -- norms and class membership ----------------------------------------------


def _vec_norm(v: Vec) -> float:
    return math.sqrt(float(sum(x * x for x in v)))


class C1Bound(NamedTuple):
    bound: float  # certified upper bound for max(sup|f|, sup|Df|)
    grid_estimate: float  # observed sup over a sample grid, diagnostics only


def c1_norm_bound(f: TrigField, grid: int = 17) -> C1Bound:
    """Certified C^1 upper bound from coefficient sums; grid sup for comparison."""
    sup0 = _vec_norm(f.constant)
    sup1 = 0.0
    for m, (a, b) in f.terms.items():
        na, nb = _vec_norm(a), _vec_norm(b)
        sup0 += na + nb
        sup1 += math.sqrt(sum(x * x for x in m)) * (na + nb)
    bound = max(sup0, sup1) * (1.0 + 1e-9)  # absorb float rounding, stay an upper bound
    axes = [np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)] * f.dim
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    vals = np.linalg.norm(f.evaluate(pts), axis=-1)
    jac = f.jacobian(pts)
    ops = np.linalg.svd(jac, compute_uv=False)[..., 0] if len(f.terms) else np.zeros(len(pts))
    est = float(max(vals.max(initial=0.0), ops.max(initial=0.0)))
    return C1Bound(float(bound), est)


class VdReport(NamedTuple):
    finite: bool
    span_modes: int
    span_values: int
    divergence_free: bool
    in_vd: bool


def check_class_Vd(f: TrigField) -> VdReport:
    """Exact test of the three admissibility conditions (plus div-free)."""
    span_m = rational_rank([fvec(m) for m in f.terms])
    values = []
    for a, b in f.terms.values():
        values.append(a)
        values.append(b)
    span_v = rational_rank(values)
    divfree = is_divergence_free(f)
    in_vd = divfree and span_m == f.dim and span_v == f.dim
    return VdReport(True, span_m, span_v, divfree, in_vd)
