"""Numerical flows of dx/dt = alpha(t) f(x) + u(t) and their diagnostics.

Fixed-step RK4 with steps aligned to control discontinuities; coordinates
are reduced mod 2*pi.  The variational equation is integrated alongside on
request for volume-preservation checks, and ``variation_decompose``
verifies the factorization of the controlled flow into the flow of the
translated field composed with a translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .torus import TWO_PI, torus_distance, wrap
from .trigfield import TrigField, mean


@dataclass(frozen=True)
class Segment:
    duration: float
    u: tuple[float, ...]
    alpha: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment durations must be positive")


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise-constant control law (per-segment drift gain and translation)."""

    segments: tuple[Segment, ...]

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def dim(self) -> int:
        return len(self.segments[0].u)

    @staticmethod
    def constant(u, duration: float, alpha: float = 1.0) -> "ControlSignal":
        return ControlSignal((Segment(duration, tuple(float(x) for x in u), alpha),))

    def theta(self, t: float) -> np.ndarray:
        """Integral of u over [0, t] (piecewise linear, exact per segment)."""
        out = np.zeros(self.dim)
        left = t
        for seg in self.segments:
            step = min(left, seg.duration)
            if step <= 0:
                break
            out += step * np.asarray(seg.u)
            left -= step
        return out


@dataclass
class EnsemblePath:
    """Recorded trajectory of an N-point ensemble."""

    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)  # each (N, d), wrapped
    jacobians: list[np.ndarray] | None = None  # final (N, d, d) when requested

    def final(self) -> np.ndarray:
        return self.states[-1]


Trajectory = EnsemblePath


def _segment_steps(duration: float, dt: float) -> tuple[int, float]:
    n = max(1, int(math.ceil(duration / dt - 1e-12)))
    return n, duration / n


def _rhs(f: TrigField, x: np.ndarray, alpha: float, u: np.ndarray) -> np.ndarray:
    return alpha * f.evaluate(x) + u


def integrate_flow(
    f: TrigField,
    ctrl: ControlSignal,
    x0,
    dt: float,
    record_every: int = 1,
    with_jacobian: bool = False,
) -> EnsemblePath:
    """RK4 flow of the controlled system from an (N, d) initial ensemble."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = wrap(np.atleast_2d(np.asarray(x0, dtype=float)))
    n_pts, d = x.shape
    path = EnsemblePath(times=[0.0], states=[x.copy()])
    jac = np.broadcast_to(np.eye(d), (n_pts, d, d)).copy() if with_jacobian else None
    t = 0.0
    for seg in ctrl.segments:
        if dt > seg.duration + 1e-12:
            raise ValueError("dt exceeds a segment duration")
        u = np.asarray(seg.u, dtype=float)
        steps, h = _segment_steps(seg.duration, dt)
        for k in range(steps):
            k1 = _rhs(f, x, seg.alpha, u)
            k2 = _rhs(f, x + 0.5 * h * k1, seg.alpha, u)
            k3 = _rhs(f, x + 0.5 * h * k2, seg.alpha, u)
            k4 = _rhs(f, x + h * k3, seg.alpha, u)
            if jac is not None:
                j1 = seg.alpha * f.jacobian(x) @ jac
                j2 = seg.alpha * f.jacobian(x + 0.5 * h * k1) @ (jac + 0.5 * h * j1)
                j3 = seg.alpha * f.jacobian(x + 0.5 * h * k2) @ (jac + 0.5 * h * j2)
                j4 = seg.alpha * f.jacobian(x + h * k3) @ (jac + h * j3)
                jac = jac + (h / 6.0) * (j1 + 2 * j2 + 2 * j3 + j4)
            x = wrap(x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
            t += h
            if (k + 1) % record_every == 0 or k == steps - 1:
                path.times.append(t)
                path.states.append(x.copy())
    if with_jacobian:
        path.jacobians = [jac[i] for i in range(n_pts)]
    return path


def variational_jacobian(f: TrigField, ctrl: ControlSignal, x0, dt: float) -> list[np.ndarray]:
    """Flow Jacobians J(T) per ensemble point (J' = alpha Df(x) J, J(0)=I)."""
    path = integrate_flow(f, ctrl, x0, dt, record_every=10**9, with_jacobian=True)
    return path.jacobians


@dataclass(frozen=True)
class DecompositionReport:
    max_discrepancy: float  # sup over the time grid of max-over-points torus distance
    endpoint_discrepancy: float
    dt: float


def variation_decompose(f: TrigField, ctrl: ControlSignal, x0, dt: float) -> DecompositionReport:
    """Check flow(f + u) against flow of the translated field then translation.

    Integrates the direct system at step dt and y' = f(y + theta(t)) at
    step dt/2 from the same start (alpha must be 1 in every segment),
    composes y with the translation by theta(t), and reports the sup torus
    distance on the step grid.  The two sides use different steps on
    purpose: with a shared step RK4 commutes exactly with the translation
    change of variables for piecewise-constant u, and the comparison would
    only exercise rounding, not the decomposition.
    """
    if any(seg.alpha != 1.0 for seg in ctrl.segments):
        raise ValueError("the decomposition check requires alpha == 1")
    x = wrap(np.atleast_2d(np.asarray(x0, dtype=float)))
    y = x.copy()
    theta = np.zeros(x.shape[1])
    worst = 0.0
    gap = 0.0
    for seg in ctrl.segments:
        if dt > seg.duration + 1e-12:
            raise ValueError("dt exceeds a segment duration")
        u = np.asarray(seg.u, dtype=float)
        steps, h = _segment_steps(seg.duration, dt)
        for _ in range(steps):
            # direct flow of f + u, one step of size h
            k1 = f.evaluate(x) + u
            k2 = f.evaluate(x + 0.5 * h * k1) + u
            k3 = f.evaluate(x + 0.5 * h * k2) + u
            k4 = f.evaluate(x + h * k3) + u
            x = wrap(x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
            # reduced flow y' = f(y + theta(t)): two steps of size h/2,
            # theta is linear inside the segment
            hh = 0.5 * h
            for _ in range(2):
                l1 = f.evaluate(y + theta)
                l2 = f.evaluate(y + 0.5 * hh * l1 + (theta + 0.5 * hh * u))
                l3 = f.evaluate(y + 0.5 * hh * l2 + (theta + 0.5 * hh * u))
                l4 = f.evaluate(y + hh * l3 + (theta + hh * u))
                y = y + (hh / 6.0) * (l1 + 2 * l2 + 2 * l3 + l4)
                theta = theta + hh * u
            composed = wrap(y + theta)
            gap = max(torus_distance(composed[i], x[i]) for i in range(x.shape[0]))
            worst = max(worst, gap)
    return DecompositionReport(worst, gap, dt)


def cone_mean_check(f: TrigField, grid_size: int, samples: int = 8, seed: int = 0) -> float:
    """Max norm over sample points of the grid average of translated fields.

    The average of f(x + theta) over theta in the uniform (2*pi/L)-grid is a
    character sum that vanishes exactly whenever no nonzero mode of f is
    divisible by L in every coordinate; requires a mean-free field.
    """
    if any(c != 0 for c in mean(f)):
        raise ValueError("cone_mean_check requires a mean-normalized field")
    if grid_size < 1:
        raise ValueError("grid size must be at least 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, TWO_PI, size=(samples, f.dim))
    pts[0] = 0.0
    axes = [np.arange(grid_size) * (TWO_PI / grid_size)] * f.dim
    thetas = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.dim)
    worst = 0.0
    for x in pts:
        avg = f.evaluate(x[None, :] + thetas).mean(axis=0)
        worst = max(worst, float(np.linalg.norm(avg)))
    return worst
