"""Planar angle arithmetic, bearings and ray intersection.

Angles are plain floats in radians. Every angle produced here is normalized
to the half-open range [-pi, pi).
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

from airblock.errors import DegenerateGeometryError, InvalidInputError, TargetReachedError

TWO_PI = 2.0 * math.pi
PARALLEL_TOL = 1e-12


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k: float) -> "Vec2":  # type: ignore[override]
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other[0] + self.y * other[1]

    def cross(self, other: "Vec2") -> float:
        """Scalar z-component of the 2D cross product."""
        return self.x * other[1] - self.y * other[0]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        return normalize_angle(math.atan2(self.y, self.x))

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)

    @classmethod
    def polar(cls, length: float, angle: float) -> "Vec2":
        return cls(length * math.cos(angle), length * math.sin(angle))


class Intersection(NamedTuple):
    point: Vec2
    k1: float
    k2: float


def normalize_angle(a: float) -> float:
    """Map ``a`` into [-pi, pi) via ((a + pi) mod 2pi) - pi."""
    if not math.isfinite(a):
        raise InvalidInputError(f"angle must be finite, got {a!r}")
    out = math.fmod(a + math.pi, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    out -= math.pi
    # fmod + shift can land on +pi through rounding; keep the range half-open
    if out >= math.pi:
        out -= TWO_PI
    return out


def angle_diff(a: float, b: float) -> float:
    """Signed difference ``a - b`` normalized to [-pi, pi)."""
    return normalize_angle(a - b)


def bearing(p_i: Vec2, p_j: Vec2) -> float:
    """Direction from ``p_i`` to ``p_j``."""
    dx = p_j[0] - p_i[0]
    dy = p_j[1] - p_i[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("bearing between coincident points")
    return normalize_angle(math.atan2(dy, dx))


def bearing_rate(p_i: Vec2, p_j: Vec2, u_i: Vec2, u_j: Vec2) -> float:
    """Time derivative of ``bearing(p_i, p_j)`` under velocities ``u_i``, ``u_j``."""
    rx = p_j[0] - p_i[0]
    ry = p_j[1] - p_i[1]
    d2 = rx * rx + ry * ry
    if d2 == 0.0:
        raise DegenerateGeometryError("bearing rate between coincident points")
    wx = u_j[0] - u_i[0]
    wy = u_j[1] - u_i[1]
    return (rx * wy - ry * wx) / d2


def cruising_angle(p: Vec2, target: Vec2) -> float:
    """Heading that points from ``p`` straight at ``target``.

    Raises:
        TargetReachedError: if ``p`` coincides with ``target``.
    """
    dx = target[0] - p[0]
    dy = target[1] - p[1]
    if dx == 0.0 and dy == 0.0:
        raise TargetReachedError("position coincides with target")
    return normalize_angle(math.atan2(dy, dx))


def line_intersection(
    p1: Vec2, d1: Vec2, p2: Vec2, d2: Vec2, parallel_tol: float = PARALLEL_TOL
) -> Optional[Intersection]:
    """Intersect the lines ``p1 + k1*d1`` and ``p2 + k2*d2``.

    Returns None when the directions are parallel within ``parallel_tol``.
    The scalars may be negative; callers decide whether that is acceptable.
    """
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < parallel_tol:
        return None
    wx = p2[0] - p1[0]
    wy = p2[1] - p1[1]
    k1 = (wx * d2[1] - wy * d2[0]) / denom
    k2 = (wx * d1[1] - wy * d1[0]) / denom
    point = Vec2(p1[0] + k1 * d1[0], p1[1] + k1 * d1[1])
    return Intersection(point, k1, k2)


def encounter_point(p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2) -> Optional[Vec2]:
    """Crossing point of the segments ``p1->t1`` and ``p2->t2``, if any."""
    s1 = Vec2(t1[0] - p1[0], t1[1] - p1[1])
    s2 = Vec2(t2[0] - p2[0], t2[1] - p2[1])
    len1 = s1.norm()
    len2 = s2.norm()
    if len1 == 0.0 or len2 == 0.0:
        raise DegenerateGeometryError("segment endpoints coincide")
    hit = line_intersection(Vec2(*p1), s1 * (1.0 / len1), Vec2(*p2), s2 * (1.0 / len2))
    if hit is None:
        return None
    eps = 1e-9 * max(len1, len2, 1.0)
    if -eps <= hit.k1 <= len1 + eps and -eps <= hit.k2 <= len2 + eps:
        return hit.point
    return None
