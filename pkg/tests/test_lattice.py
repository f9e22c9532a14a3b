import itertools
import random
from fractions import Fraction

import pytest

import toruscontrol as tc
from toruscontrol.lattice import canonical_mode


def exhaustive_member(generators, m, coeff_range=10):
    """Brute-force membership oracle: integer combinations in a box."""
    gens = list(generators)
    for coeffs in itertools.product(range(-coeff_range, coeff_range + 1), repeat=len(gens)):
        v = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(len(m)))
        if v == tuple(m):
            return True
    return False


class TestWedgeCross:
    def test_wedge_identity_basis(self):
        assert tc.wedge2((1, 0), (0, 1)) == 1

    def test_wedge_hand_value(self):
        assert tc.wedge2((1, 2), (2, 1)) == -3

    def test_wedge_colinear(self):
        assert tc.wedge2((2, 4), (1, 2)) == 0

    def test_wedge_dim_mismatch(self):
        with pytest.raises(ValueError):
            tc.wedge2((1, 0, 0), (0, 1, 0))

    def test_cross_basis(self):
        assert tc.cross3((1, 0, 0), (0, 1, 0)) == (0, 0, 1)

    def test_cross_self(self):
        a = (3, -2, 5)
        assert tc.cross3(a, a) == (0, 0, 0)

    def test_cross_hand_value(self):
        assert tc.cross3((1, 2, 3), (4, 5, 6)) == (-3, 6, -3)

    def test_cross_rational(self):
        out = tc.cross3((Fraction(1, 2), 0, 0), (0, Fraction(1, 3), 0))
        assert out == (0, 0, Fraction(1, 6))


class TestSubgroup:
    def test_standard_basis(self):
        g = tc.subgroup_generated([(1, 0), (0, 1)])
        assert g.rank == 2 and g.index == 1
        assert g.basis == ((1, 0), (0, 1))

    def test_index_three(self):
        g = tc.subgroup_generated([(2, 1), (1, 2)])
        assert g.rank == 2 and g.index == 3
        # confirm by exhaustive coefficient search in a box
        for m in itertools.product(range(-3, 4), repeat=2):
            assert tc.contains(g, m) == exhaustive_member([(2, 1), (1, 2)], m, 6)

    def test_colinear(self):
        g = tc.subgroup_generated([(2, 0), (4, 0)])
        assert g.rank == 1 and g.index is None
        assert g.basis == ((2, 0),)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            tc.subgroup_generated([])

    def test_membership_examples(self):
        g = tc.subgroup_generated([(2, 1), (1, 2)])
        assert not tc.contains(g, (1, 0))
        assert tc.contains(g, (3, 3))
        assert tc.contains(g, (0, 0))

    def test_membership_vs_exhaustive_random(self, rng):
        for _ in range(60):
            d = rng.choice([2, 3])
            gens = [
                tuple(rng.randint(-3, 3) for _ in range(d))
                for _ in range(rng.randint(1, 3))
            ]
            if all(not any(g) for g in gens):
                continue
            g = tc.subgroup_generated(gens)
            m = tuple(rng.randint(-3, 3) for _ in range(d))
            assert tc.contains(g, m) == exhaustive_member(gens, m)

    def test_hnf_shape(self, rng):
        # pivot columns increase, pivots positive, entries above reduced
        for _ in range(40):
            d = rng.choice([2, 3])
            gens = [tuple(rng.randint(-4, 4) for _ in range(d)) for _ in range(3)]
            if all(not any(g) for g in gens):
                continue
            g = tc.subgroup_generated(gens)
            pivots = []
            for row in g.basis:
                piv = next(j for j, x in enumerate(row) if x != 0)
                assert row[piv] > 0
                pivots.append(piv)
            assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
            for i, row in enumerate(g.basis):
                piv = next(j for j, x in enumerate(row) if x != 0)
                for k in range(i):
                    assert 0 <= g.basis[k][piv] < row[piv]
            # every generator is a member
            for gen in gens:
                assert tc.contains(g, gen)


class TestDualGroup:
    def test_self_dual(self):
        g = tc.subgroup_generated([(1, 0), (0, 1)])
        d = tc.dual_group(g)
        assert d.quotient_reps == ((Fraction(0), Fraction(0)),)

    def test_doubled_lattice(self):
        g = tc.subgroup_generated([(2, 0), (0, 2)])
        d = tc.dual_group(g)
        assert len(d.quotient_reps) == 4
        half = Fraction(1, 2)
        assert set(d.quotient_reps) == {
            (Fraction(0), Fraction(0)),
            (Fraction(0), half),
            (half, Fraction(0)),
            (half, half),
        }

    def test_index_equals_rep_count(self):
        g = tc.subgroup_generated([(2, 1), (1, 2)])
        d = tc.dual_group(g)
        assert len(d.quotient_reps) == g.index == 3

    def test_pairing_integrality(self, rng):
        for _ in range(30):
            dd = rng.choice([2, 3])
            gens = [tuple(rng.randint(-3, 3) for _ in range(dd)) for _ in range(dd)]
            g = tc.subgroup_generated(gens)
            if g.rank < dd:
                with pytest.raises(ValueError):
                    tc.dual_group(g)
                continue
            dual = tc.dual_group(g)
            assert len(dual.quotient_reps) == g.index
            for x in dual.quotient_reps + dual.basis:
                for y in g.basis:
                    v = sum(a * b for a, b in zip(x, y))
                    assert v == int(v)


class TestGcdCriterion:
    def test_examples(self):
        assert tc.gcd_wedge_criterion([(1, 0), (0, 1)])
        assert not tc.gcd_wedge_criterion([(2, 0), (0, 2)])
        assert not tc.gcd_wedge_criterion([(1, 2), (2, 1)])

    def test_few_modes(self):
        assert not tc.gcd_wedge_criterion([])
        assert not tc.gcd_wedge_criterion([(3, 1)])
        assert not tc.gcd_wedge_criterion([(1, 2), (2, 4)])

    def test_equivalence_with_index_small_family(self):
        # spot family here; the exhaustive |S|<=3 sweep runs in acceptance
        modes = [m for m in itertools.product(range(-2, 3), repeat=2)]
        rnd = random.Random(7)
        for _ in range(300):
            s = rnd.sample(modes, rnd.randint(1, 3))
            if all(not any(m) for m in s):
                continue
            g = tc.subgroup_generated(s)
            assert tc.gcd_wedge_criterion(s) == (g.index == 1)


class TestSpanDimension:
    def test_full(self):
        assert tc.span_dimension([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == 3

    def test_colinear(self):
        assert tc.span_dimension([(1, 2), (2, 4)]) == 1

    def test_empty(self):
        assert tc.span_dimension([]) == 0


def ik_closure_enumeration(modes, box):
    """Independent fixed-point enumeration used as the oracle."""
    cur = set()
    for m in modes:
        for s in (m, tuple(-x for x in m)):
            if all(abs(x) <= box for x in s):
                cur.add(s)
    changed = True
    while changed:
        changed = False
        for m in list(cur):
            for n in list(cur):
                if m[0] * n[1] - m[1] * n[0] == 0:
                    continue
                t = (m[0] + n[0], m[1] + n[1])
                if all(abs(x) <= box for x in t) and t not in cur:
                    cur.add(t)
                    changed = True
    return cur


class TestIkClosure:
    def test_standard_basis_fills_box(self):
        out = tc.ik_closure([(1, 0), (0, 1)], 2)
        expected = {
            m for m in itertools.product(range(-2, 3), repeat=2) if any(m)
        }
        assert out == expected

    def test_colinear_no_additions(self):
        out = tc.ik_closure([(1, 0), (2, 0)], 4)
        assert out == {(1, 0), (-1, 0), (2, 0), (-2, 0)}

    def test_sublattice_matches_subgroup(self):
        out = tc.ik_closure([(2, 1), (1, 2)], 3)
        g = tc.subgroup_generated([(2, 1), (1, 2)])
        expected = {
            m
            for m in itertools.product(range(-3, 4), repeat=2)
            if any(m) and tc.contains(g, m)
        }
        assert out == expected

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(25):
            modes = [
                (rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(rng.randint(1, 3))
            ]
            modes = [m for m in modes if any(m)]
            if not modes:
                continue
            box = rng.randint(2, 4)
            assert tc.ik_closure(modes, box) == ik_closure_enumeration(modes, box)

    def test_subset_of_subgroup(self, rng):
        for _ in range(25):
            modes = [
                (rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(rng.randint(1, 3))
            ]
            modes = [m for m in modes if any(m)]
            if not modes:
                continue
            g = tc.subgroup_generated(modes)
            for m in tc.ik_closure(modes, 4):
                assert tc.contains(g, m)


def test_canonical_mode():
    assert canonical_mode((-1, 2)) == (1, -2)
    assert canonical_mode((0, -3)) == (0, 3)
    assert canonical_mode((0, 0)) == (0, 0)
    assert canonical_mode((2, -5, 1)) == (2, -5, 1)
