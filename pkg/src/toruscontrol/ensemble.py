"""Finite ensembles of torus points: lifts, rank tests, bumps, separation.

The bump field realizes a constant vector on an inner ball with support in
an outer ball and identically zero divergence: it is the rotation of a
cut-off linear form (d=2) or the curl of a cut-off cross-product potential
(d=3), so vanishing divergence is an algebraic identity rather than an
approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .torus import pairwise_min_distance, torus_delta, torus_distance, wrap
from .trigfield import TrigField, c1_norm_bound
from .closure import ModeSpanTable


@dataclass(frozen=True)
class EnsembleState:
    """N pairwise-distinct torus points, coordinates wrapped to [0, 2*pi)."""

    dim: int
    points: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("ensembles live on T^2 or T^3")
        if not self.points:
            raise ValueError("ensemble needs at least one point")
        if any(len(p) != self.dim for p in self.points):
            raise ValueError("point dimension mismatch")
        if self.separation() <= 0.0:
            raise ValueError("ensemble points must be pairwise distinct")

    @staticmethod
    def of(points: Sequence[Sequence[float]]) -> "EnsembleState":
        pts = [tuple(float(v) for v in wrap(p)) for p in points]
        return EnsembleState(len(pts[0]), tuple(pts))

    def __len__(self) -> int:
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def separation(self) -> float:
        return pairwise_min_distance(self.points)


def lift_eval(x_field: TrigField, gamma: EnsembleState) -> np.ndarray:
    """Evaluation of the N-fold lift: concatenated values at every point."""
    if x_field.dim != gamma.dim:
        raise ValueError("dimension mismatch")
    return x_field.evaluate(gamma.array()).reshape(-1)


class RankReport(NamedTuple):
    rank: int
    generating: bool
    needed: int
    singular_values: tuple[float, ...]


def bracket_generating_test(
    table: ModeSpanTable, gamma: EnsembleState, threshold: float = 1e-8
) -> RankReport:
    """Rank of the tabulated-field evaluations on the ensemble tangent space.

    Generating means the evaluation matrix of all tabulated basis fields at
    the configuration has full rank N*d (singular values are thresholded at
    ``threshold`` times the largest).
    """
    if table.dim != gamma.dim:
        raise ValueError("dimension mismatch")
    fields = table.basis_fields()
    needed = len(gamma) * gamma.dim
    if not fields:
        return RankReport(0, False, needed, ())
    mat = np.stack([lift_eval(f, gamma) for f in fields], axis=1)
    svals = np.linalg.svd(mat, compute_uv=False)
    cutoff = threshold * (svals[0] if svals.size else 0.0)
    rank = int(np.sum(svals > cutoff))
    return RankReport(rank, rank == needed, needed, tuple(float(s) for s in svals))


# -- divergence-free bump construction ----------------------------------------


def _profile(s):
    """Smooth cutoff shape: 1 for s <= 0, 0 for s >= 1, exp(1 - 1/(1-s^2)) between."""
    s = np.asarray(s)
    out = np.zeros_like(s, dtype=complex if np.iscomplexobj(s) else float)
    inner = np.real(s) <= 0.0
    transition = (~inner) & (np.real(s) < 1.0)
    out[inner] = 1.0
    st = s[transition]
    out[transition] = np.exp(1.0 - 1.0 / (1.0 - st * st))
    return out


@dataclass(frozen=True)
class BumpField:
    """Divergence-free field equal to ``target`` on the inner ball.

    d=2: X = (d/dy, -d/dx) of chi * (a1 dy - a2 dx paired with position);
    d=3: X = curl(chi * (a x (x - center))) with chi = profile / (d - 1).
    """

    dim: int
    center: tuple[float, ...]
    r_in: float
    r_out: float
    target: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("bump fields are built on T^2 or T^3")
        if not 0.0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out")
        if self.r_out >= math.pi:
            raise ValueError("outer ball must embed in a fundamental domain")
        if len(self.center) != self.dim or len(self.target) != self.dim:
            raise ValueError("center/target dimension mismatch")

    def _chi_and_grad(self, delta: np.ndarray):
        """Cutoff value and gradient at displacements from the center."""
        r = np.sqrt(np.sum(delta * delta, axis=-1))
        width = self.r_out - self.r_in
        s = (r - self.r_in) / width
        chi = _profile(s) / (self.dim - 1)
        transition = (np.real(s) > 0.0) & (np.real(s) < 1.0)
        dchi_dr = np.zeros_like(chi)
        st = s[transition]
        shape = np.exp(1.0 - 1.0 / (1.0 - st * st))
        dchi_dr[transition] = shape * (-2.0 * st / (1.0 - st * st) ** 2) / (
            width * (self.dim - 1)
        )
        grad = np.zeros_like(delta)
        safe = np.real(r) > 0.0
        grad[safe] = (dchi_dr[safe] / r[safe])[..., None] * delta[safe]
        return chi, grad

    def evaluate_local(self, delta: np.ndarray) -> np.ndarray:
        """Value at center + delta in the chart (complex-safe for derivatives)."""
        delta = np.atleast_2d(delta)
        a = np.asarray(self.target, dtype=delta.dtype)
        chi, grad = self._chi_and_grad(delta)
        if self.dim == 2:
            # stream function chi * L, L = a1*d2 - a2*d1; X = (dL-stream/dy, -d/dx)
            lform = a[0] * delta[..., 1] - a[1] * delta[..., 0]
            x1 = grad[..., 1] * lform + chi * a[0]
            x2 = -grad[..., 0] * lform + chi * a[1]
            return np.stack([x1, x2], axis=-1)
        potential_grad_term = np.cross(grad, np.cross(np.broadcast_to(a, delta.shape), delta))
        return potential_grad_term + 2.0 * chi[..., None] * a

    def evaluate(self, x) -> np.ndarray:
        """Torus-aware evaluation: nearest-image displacement from the center."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        delta = torus_delta(x, np.asarray(self.center))
        return self.evaluate_local(delta)

    def divergence_at(self, x) -> np.ndarray:
        """Divergence by complex-step differentiation (machine precision)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        delta = torus_delta(x, np.asarray(self.center)).astype(complex)
        h = 1e-20
        out = np.zeros(x.shape[0])
        for axis in range(self.dim):
            bumped = delta.copy()
            bumped[:, axis] += 1j * h
            out += np.imag(self.evaluate_local(bumped)[:, axis]) / h
        return out


def bump_field(a, center, r_in: float, r_out: float) -> BumpField:
    a = tuple(float(v) for v in a)
    center = tuple(float(v) for v in center)
    return BumpField(len(a), center, float(r_in), float(r_out), a)


@dataclass(frozen=True)
class BumpSum:
    """Sum of disjointly supported bumps (possibly empty: the zero field)."""

    dim: int
    bumps: tuple[BumpField, ...]

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for b in self.bumps:
            out += b.evaluate(x)
        return out

    def divergence_at(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        for b in self.bumps:
            out += b.divergence_at(x)
        return out


def interpolating_divfree_field(
    gamma: EnsembleState, targets: Sequence[Sequence[float]], r_out: float | None = None
) -> BumpSum:
    """Divergence-free field hitting prescribed values at the ensemble points.

    One bump per point with nonzero target, all supports pairwise disjoint;
    the radius defaults to a fifth of the minimal pairwise separation.
    """
    if len(targets) != len(gamma):
        raise ValueError("need one target per ensemble point")
    sep = gamma.separation()
    if r_out is None:
        r_out = min(sep / 5.0, 1.0)
    if not sep > 4.0 * r_out:
        raise ValueError("ensemble separation too small for the requested radius")
    bumps = []
    for point, tgt in zip(gamma.points, targets):
        if any(float(v) != 0.0 for v in tgt):
            bumps.append(bump_field(tgt, point, r_out / 2.0, r_out))
    return BumpSum(gamma.dim, tuple(bumps))


# -- separation lower bound ----------------------------------------------------


def separation_bound(f: TrigField, x0: EnsembleState, horizon: float) -> float:
    """Certified lower bound on the distance of two transported points.

    Whatever the control, two trajectories of the same controlled field can
    approach each other at most exponentially at the rate of the certified
    C^1 bound, so dist(x1(t), x2(t)) >= exp(-T * ||f||_1) * dist at time 0
    for all t in [0, T].
    """
    if len(x0) != 2:
        raise ValueError("the separation bound compares exactly two points")
    if horizon < 0:
        raise ValueError("time horizon must be non-negative")
    d0 = torus_distance(x0.points[0], x0.points[1])
    return math.exp(-horizon * c1_norm_bound(f).bound) * d0
