"""Shared seeded generators for random exact fields and ensembles."""

from fractions import Fraction
import random

import numpy as np
import pytest

import toruscontrol as tc
from toruscontrol.trigfield import perp_basis_3d
from toruscontrol.lattice import canonical_mode


def random_fraction(rng: random.Random, span: int = 8) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.choice([1, 2, 3, 4]))


def random_modes(rng: random.Random, dim: int, count: int, max_coord: int):
    modes = set()
    while len(modes) < count:
        m = tuple(rng.randint(-max_coord, max_coord) for _ in range(dim))
        if any(m):
            modes.add(canonical_mode(m))
    return sorted(modes)


def random_divfree_field(rng: random.Random, dim: int, n_modes: int, max_coord: int = 2) -> tc.TrigField:
    """Random exact divergence-free field (coefficients orthogonal to modes)."""
    items = []
    for m in random_modes(rng, dim, n_modes, max_coord):
        if dim == 2:
            perp = (-m[1], m[0])
            basis = [perp]
        else:
            basis = list(perp_basis_3d(m))
        a = [Fraction(0)] * dim
        b = [Fraction(0)] * dim
        for v in basis:
            ca, cb = random_fraction(rng), random_fraction(rng)
            for i in range(dim):
                a[i] += ca * v[i]
                b[i] += cb * v[i]
        items.append((m, a, b))
    return tc.trig_field(dim, items)


def random_vd_field(rng: random.Random, dim: int, n_modes: int = 3, max_coord: int = 2) -> tc.TrigField:
    """Random field satisfying the admissibility class (mode and value spans full)."""
    while True:
        f = random_divfree_field(rng, dim, n_modes, max_coord)
        if tc.check_class_Vd(f).in_vd:
            return f


def random_stream(rng: random.Random, n_modes: int = 3, max_coord: int = 3) -> tc.TrigScalar:
    items = []
    for m in random_modes(rng, 2, n_modes, max_coord):
        items.append((m, (random_fraction(rng), random_fraction(rng))))
    return tc.trig_scalar(2, items)


def random_ensemble(rng: np.random.Generator, dim: int, n: int, min_sep: float = 0.5) -> tc.EnsembleState:
    while True:
        pts = rng.uniform(0.0, 2.0 * np.pi, (n, dim))
        try:
            e = tc.EnsembleState.of(pts)
        except ValueError:
            continue
        if e.separation() > min_sep:
            return e


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def nprng():
    return np.random.default_rng(20240817)
