"""Planar vector primitives used by every other module.

Angles are counterclockwise and normalised to ``[0, 2*pi)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import SingularBearing, ZeroVector

TWO_PI = 2.0 * math.pi

# Floor on distances used as directions (world units).
EPS_MIN = 1e-9


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k):  # type: ignore[override]
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def cross(self, other) -> float:
        """z-component of the 3D cross product."""
        return self.x * other[1] - self.y * other[0]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def as_vec(v) -> Vec2:
    if isinstance(v, Vec2):
        return v
    x, y = v
    return Vec2(float(x), float(y))


def rot90(v) -> Vec2:
    """Apply E = [[0, 1], [-1, 0]]: a clockwise quarter turn.

    For a bearing that points at the centre this yields the counterclockwise
    tangent of the orbit.
    """
    return Vec2(v[1], -v[0])


def ccw_angle(v1, v2) -> float:
    """Counterclockwise angle from ``v1`` to ``v2`` in ``[0, 2*pi)``.

    Computed as ``atan2(v1 x v2, v1 . v2)``. The half-angle variant
    ``2*atan2(v1 x v2, |v1||v2| + v1.v2)`` cancels catastrophically for
    nearly opposite vectors, which are routine in an equally spaced ring.
    """
    x1, y1 = v1
    x2, y2 = v2
    n1 = math.hypot(x1, y1)
    n2 = math.hypot(x2, y2)
    if n1 < EPS_MIN or n2 < EPS_MIN:
        raise ZeroVector(f"ccw_angle of vectors with norms {n1:g}, {n2:g}")
    a = math.atan2(x1 * y2 - y1 * x2, x1 * x2 + y1 * y2) + 0.0
    if a < 0.0:
        a += TWO_PI
        if a >= TWO_PI:
            a = 0.0
    return a


def half_angle_ccw(v1, v2) -> float:
    """Half-angle form of :func:`ccw_angle`; loses accuracy near pi."""
    x1, y1 = v1
    x2, y2 = v2
    n1 = math.hypot(x1, y1)
    n2 = math.hypot(x2, y2)
    a = 2.0 * math.atan2(x1 * y2 - y1 * x2, n1 * n2 + x1 * x2 + y1 * y2)
    return a % TWO_PI


def distances(c, r: float, p) -> tuple[float, float]:
    """Distance from ``p`` to the centre ``c`` and to the circle of radius ``r``."""
    dc = math.hypot(c[0] - p[0], c[1] - p[1])
    return dc, abs(r - dc)


def bearing(c_hat, p) -> Vec2:
    """Unit vector from ``p`` toward the estimated centre."""
    dx = c_hat[0] - p[0]
    dy = c_hat[1] - p[1]
    d = math.hypot(dx, dy)
    if d < EPS_MIN:
        raise SingularBearing(f"agent at {tuple(p)} coincides with estimated centre")
    return Vec2(dx / d, dy / d)
