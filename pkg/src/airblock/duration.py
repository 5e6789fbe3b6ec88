"""Blocking-duration bounds and the three-option completion estimates.

During mutual blocking the line through both airplanes keeps its direction
and slides sideways at ``v * sin(delta)``. Blocking ends when that line sweeps
over one of the targets, so the relevant distance for airplane ``i`` is the
perpendicular offset of ``T_i`` from the line, ``|p_i - T_i| * sin|beta - phi|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from airblock.errors import AirblockError
from airblock.geometry import Vec2, bearing, cruising_angle, normalize_angle
from airblock.safety_filter import SafetyParams, half_angle_delta


class NotBlockingError(AirblockError):
    """Duration bounds were requested for a pair that is not blocking."""


@dataclass(frozen=True)
class BlockingBounds:
    t_lb: float
    t_ub: float


@dataclass(frozen=True)
class OptionDurations:
    t_b: float
    t_u_i: float
    t_u_j: float


def sweep_distance(p: Vec2, target: Vec2, other: Vec2) -> float:
    """Offset of ``target`` from the line through ``p`` and ``other``."""
    dist = math.hypot(target[0] - p[0], target[1] - p[1])
    if dist == 0.0:
        return 0.0
    e = normalize_angle(cruising_angle(p, target) - bearing(p, other))
    return dist * abs(math.sin(e))


def _check_in_arc(p: Vec2, target: Vec2, other: Vec2, delta: float) -> None:
    e = abs(normalize_angle(cruising_angle(p, target) - bearing(p, other)))
    if e > delta + 1e-9:
        raise NotBlockingError(
            f"cruising angle is {e:.4g} rad off the bearing, outside the arc {delta:.4g}"
        )


def blocking_bounds(
    p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2, params: SafetyParams, check: bool = True
) -> BlockingBounds:
    """Lower/upper bound on how long the current mutual blocking lasts.

    Raises:
        NotBlockingError: if ``check`` is set and a cruising angle lies outside
            the correction arc.
    """
    if check:
        delta = half_angle_delta(p1, p2, params, clamp=True)
        _check_in_arc(p1, t1, p2, delta)
        _check_in_arc(p2, t2, p1, delta)
    t_lb = min(sweep_distance(p1, t1, p2), sweep_distance(p2, t2, p1)) / params.v
    gap = max(0.0, math.hypot(p1[0] - p2[0], p1[1] - p2[1]) - params.r)
    return BlockingBounds(t_lb, t_lb + gap / (2.0 * params.v))


def _tangent(target: Vec2, centre: Vec2, r: float) -> float:
    dx = target[0] - centre[0]
    dy = target[1] - centre[1]
    return math.sqrt(max(0.0, dx * dx + dy * dy - r * r))


def option_durations(
    p_i: Vec2, t_i: Vec2, p_j: Vec2, t_j: Vec2, params: SafetyParams
) -> OptionDurations:
    """Approximate completion cost of maintaining blocking vs. either airplane yielding."""
    v, r = params.v, params.r
    o = Vec2(0.5 * (p_i[0] + p_j[0]), 0.5 * (p_i[1] + p_j[1]))
    block = min(sweep_distance(p_i, t_i, p_j), sweep_distance(p_j, t_j, p_i))
    arc = math.pi * r
    t_b = (2.0 * block + _tangent(t_i, o, r) + _tangent(t_j, o, r) + arc) / v
    t_u_i = (math.dist(t_i, p_j) + math.dist(t_j, p_j) + arc) / v
    t_u_j = (math.dist(t_i, p_i) + math.dist(t_j, p_i) + arc) / v
    return OptionDurations(t_b, t_u_i, t_u_j)
