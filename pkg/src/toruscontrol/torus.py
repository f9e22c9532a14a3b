"""Torus geometry: wrapping and the flat quotient metric."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(x) -> np.ndarray:
    """Reduce coordinates into [0, 2*pi)."""
    return np.mod(np.asarray(x, dtype=float), TWO_PI)


def torus_delta(x, y) -> np.ndarray:
    """Per-coordinate signed difference folded into [-pi, pi)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return (d + np.pi) % TWO_PI - np.pi


def torus_distance(x, y) -> float:
    """Euclidean combination of per-coordinate circle distances."""
    return float(np.linalg.norm(torus_delta(x, y)))


def pairwise_min_distance(points) -> float:
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return float("inf")
    best = float("inf")
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, torus_distance(pts[i], pts[j]))
    return best
