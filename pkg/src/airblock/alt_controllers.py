"""Velocity-obstacle and potential-field avoidance, for comparison with the CBF filter.

Neither controller carries a safety guarantee; they exist to show that the
parallel-flight (blocking) behaviour is not specific to the CBF filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from airblock.errors import ConfigError
from airblock.geometry import Vec2, normalize_angle

GRID_N = 3600


@dataclass(frozen=True)
class VOParams:
    tau: float = 10.0
    r: float = 30.0
    v: float = 5.0

    def validate(self) -> None:
        for name in ("tau", "r", "v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"VO parameter {name} must be > 0, got {value}")


@dataclass(frozen=True)
class PFParams:
    k_att: float = 1.0
    k_rep: float = 2000.0
    influence_radius: float = 60.0

    def validate(self, r: float) -> None:
        if not (self.k_att > 0 and self.k_rep > 0):
            raise ConfigError("potential-field gains must be > 0")
        if not self.influence_radius >= r:
            raise ConfigError(
                f"influence_radius {self.influence_radius} must be >= safety margin {r}"
            )


def min_separation_over_horizon(
    p_rel: np.ndarray, v_rel: np.ndarray, tau: float
) -> np.ndarray:
    """Smallest ``|p_rel + v_rel * t|`` for ``t`` in ``[0, tau]``, vectorized over rows.

    ``p_rel`` is (2,), ``v_rel`` is (n, 2). The squared distance is quadratic
    in ``t``, so the minimizer is the clamped vertex.
    """
    vv = np.einsum("ij,ij->i", v_rel, v_rel)
    pv = v_rel @ p_rel
    with np.errstate(divide="ignore", invalid="ignore"):
        t_star = np.where(vv > 0.0, -pv / vv, 0.0)
    t_star = np.clip(t_star, 0.0, tau)
    closest = p_rel[None, :] + v_rel * t_star[:, None]
    return np.hypot(closest[:, 0], closest[:, 1])


def vo_filter(
    p_i: Vec2,
    p_j: Vec2,
    u_j: Vec2,
    preferred: Vec2,
    params: VOParams,
    grid_n: int = GRID_N,
) -> Vec2:
    """Closest constant-speed velocity to ``preferred`` that avoids the velocity obstacle.

    If every sampled heading lies inside the obstacle, the heading with the
    largest predicted minimum separation is returned instead.
    """
    phi = math.atan2(preferred[1], preferred[0])
    offsets = np.linspace(-math.pi, math.pi, grid_n, endpoint=False)
    # put the zero offset first so an admissible preferred heading wins ties
    order = np.argsort(np.abs(offsets), kind="stable")
    offsets = offsets[order]
    thetas = phi + offsets
    u = params.v * np.column_stack((np.cos(thetas), np.sin(thetas)))
    p_rel = np.array([p_j[0] - p_i[0], p_j[1] - p_i[1]])
    v_rel = np.asarray(u_j, dtype=float)[None, :] - u
    sep = min_separation_over_horizon(p_rel, v_rel, params.tau)
    free = sep > params.r
    if free.any():
        idx = int(np.argmax(free))  # first free heading in |offset| order
    else:
        idx = int(np.argmax(sep))
    if idx == 0:
        return Vec2.polar(params.v, phi)
    return Vec2.polar(params.v, float(thetas[idx]))


def potential_field_heading(
    p_i: Vec2,
    target: Vec2,
    p_j: Vec2,
    params: PFParams,
    previous_heading: float = 0.0,
) -> float:
    """Heading aligned with attraction to ``target`` plus repulsion from ``p_j``."""
    tx = target[0] - p_i[0]
    ty = target[1] - p_i[1]
    dt_ = math.hypot(tx, ty)
    fx = fy = 0.0
    if dt_ > 0.0:
        fx = params.k_att * tx / dt_
        fy = params.k_att * ty / dt_
    rx = p_i[0] - p_j[0]
    ry = p_i[1] - p_j[1]
    d = math.hypot(rx, ry)
    if 0.0 < d < params.influence_radius:
        mag = params.k_rep * (1.0 / d - 1.0 / params.influence_radius) / (d * d)
        fx += mag * rx / d
        fy += mag * ry / d
    if math.hypot(fx, fy) < 1e-12:
        return normalize_angle(previous_heading)
    return normalize_angle(math.atan2(fy, fx))
