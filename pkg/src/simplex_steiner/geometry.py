"""Dimension-generic vector primitives.

Points are plain 1-D float64 numpy arrays. Everything here is a pure
function; nothing mutates its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

Point = np.ndarray
PointLike = Union[Sequence[float], np.ndarray]

# Angles within this many radians of 120 degrees count as ">= 120".
ANGLE_TOL_RAD = 1e-9
_TWO_THIRDS_PI = 2.0 * np.pi / 3.0


class DimensionError(ValueError):
    """Points of different dimensions were combined."""


class DegenerateError(ValueError):
    """A geometric quantity is undefined (zero-length ray, coincident vertices)."""


def as_point(p: PointLike) -> Point:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"a point must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def _same_dim(*points: Point) -> None:
    dims = {p.shape[0] for p in points}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


def distance(p: PointLike, q: PointLike) -> float:
    p, q = as_point(p), as_point(q)
    _same_dim(p, q)
    return float(np.linalg.norm(p - q))


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    # Kahan's formula; accurate near 0 and pi where arccos is not.
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    u, v = u / nu, v / nv
    return float(2.0 * np.arctan2(np.linalg.norm(u - v), np.linalg.norm(u + v)))


def angle_at_rad(vertex: PointLike, a: PointLike, b: PointLike) -> float:
    vertex, a, b = as_point(vertex), as_point(a), as_point(b)
    _same_dim(vertex, a, b)
    u, v = a - vertex, b - vertex
    if not np.any(u) or not np.any(v):
        raise DegenerateError("angle undefined for a zero-length ray")
    return _angle_between(u, v)


def angle_at(vertex: PointLike, a: PointLike, b: PointLike) -> float:
    """Included angle in degrees between the rays vertex->a and vertex->b."""
    return float(np.degrees(angle_at_rad(vertex, a, b)))


@dataclass(frozen=True)
class FermatResult:
    point: Point
    is_interior: bool
    total_length: float


def fermat_point(a: PointLike, b: PointLike, c: PointLike) -> FermatResult:
    """Point minimising the summed distance to three distinct points.

    If some interior angle is at least 120 degrees (within ``ANGLE_TOL_RAD``)
    the minimiser is that vertex. Otherwise the Fermat point is evaluated
    from its barycentric coordinates ``|BC| / sin(A + 60deg) : ...``, which
    is exact in the plane of the triangle and works in any ambient
    dimension.
    """
    pts = [as_point(a), as_point(b), as_point(c)]
    _same_dim(*pts)
    for i in range(3):
        for j in range(i + 1, 3):
            if np.array_equal(pts[i], pts[j]):
                raise DegenerateError(f"vertices {i} and {j} coincide")
    return _fermat_unchecked(*pts)


def _fermat_unchecked(a: Point, b: Point, c: Point) -> FermatResult:
    pts = (a, b, c)
    angles = [
        _angle_between(pts[(i + 1) % 3] - pts[i], pts[(i + 2) % 3] - pts[i])
        for i in range(3)
    ]
    widest = int(np.argmax(angles))
    if angles[widest] >= _TWO_THIRDS_PI - ANGLE_TOL_RAD:
        p = pts[widest].copy()
        return FermatResult(p, False, _total(p, pts))
    sides = [np.linalg.norm(pts[(i + 1) % 3] - pts[(i + 2) % 3]) for i in range(3)]
    w = np.array([s / np.sin(t + np.pi / 3.0) for s, t in zip(sides, angles)])
    w /= w.sum()
    p = w[0] * a + w[1] * b + w[2] * c
    return FermatResult(p, True, _total(p, pts))


def _total(p: Point, pts) -> float:
    return float(sum(np.linalg.norm(p - q) for q in pts))


def fermat_of(a: Point, b: Point, c: Point) -> Point:
    """Fermat point that tolerates coincident inputs.

    Used inside iterative solvers where neighbours may momentarily share a
    location: with a repeated point the minimiser is that point.
    """
    if np.array_equal(a, b) or np.array_equal(a, c):
        return a.copy()
    if np.array_equal(b, c):
        return b.copy()
    return _fermat_unchecked(a, b, c).point


def split(p: PointLike) -> Point:
    """(x1, ..., xd) -> (x1/2, x1/2, ..., xd/2, xd/2)."""
    p = as_point(p)
    return np.repeat(p / 2.0, 2)


def in_convex_hull(x: PointLike, points: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether ``x`` lies in conv(points) up to ``tol`` (nonnegative least squares)."""
    from scipy.optimize import nnls

    x = as_point(x)
    P = np.asarray(points, dtype=float)
    # Heavy weight on the affine row so the multipliers sum to one.
    A = np.vstack([P.T, 1e3 * np.ones(P.shape[0])])
    rhs = np.concatenate([x, [1e3]])
    _, resid = nnls(A, rhs)
    return bool(resid <= tol)
