"""Closed-form CBF safety filter for constant-speed heading control.

The barrier is ``h = |p_i - p_j|^2 - r^2`` with a linear class-K slope
``alpha``. Each airplane takes half the responsibility, which turns the
heading QP into "stay at least ``delta`` away from the bearing to the other
airplane". :func:`filter_heading` solves it in closed form;
:func:`qp_oracle` solves the same angular problem by brute-force search and
is used only to check the closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from airblock.errors import ConfigError, DegenerateGeometryError, SafetyViolationError
from airblock.geometry import Vec2, bearing, normalize_angle

HALF_PI = 0.5 * math.pi
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SafetyParams:
    r: float = 30.0
    alpha: float = 3.0
    v: float = 5.0

    def validate(self) -> None:
        for name in ("r", "alpha", "v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"safety parameter {name} must be > 0, got {value}")


class Branch(str, enum.Enum):
    UNCHANGED = "Unchanged"
    CORRECTED_MINUS = "CorrectedMinus"
    CORRECTED_PLUS = "CorrectedPlus"
    TIE_BREAK = "TieBreak"


@dataclass(frozen=True)
class FilterDecision:
    theta: float
    activated: bool
    delta: float
    branch: Branch
    beta: float
    violated: bool = False


def cbf_value(p1: Vec2, p2: Vec2, params: SafetyParams) -> float:
    dx = p1[0] - p2[0]
    dy = p1[1] - p2[1]
    return dx * dx + dy * dy - params.r * params.r


def _constraint_level(h: float, distance: float, params: SafetyParams) -> float:
    # cos(theta - beta) <= L is the per-agent CBF condition at speed v
    return params.alpha * h / (4.0 * params.v * distance)


def half_angle_delta(p1: Vec2, p2: Vec2, params: SafetyParams, clamp: bool = False) -> float:
    """Half-width of the unsafe heading arc around the bearing.

    With ``clamp=True`` a state inside the margin (h < 0) yields pi/2 instead
    of raising, which is what the simulator wants.
    """
    distance = math.hypot(p1[0] - p2[0], p1[1] - p2[1])
    if distance == 0.0:
        raise DegenerateGeometryError("half-angle between coincident points")
    h = cbf_value(p1, p2, params)
    if h < 0.0:
        if clamp:
            return HALF_PI
        raise SafetyViolationError(f"separation {distance:.6g} m is below r = {params.r:g} m")
    level = _constraint_level(h, distance, params)
    return math.acos(min(1.0, level))


def free_flight_threshold(params: SafetyParams) -> float:
    """Separation above which every heading satisfies the CBF condition."""
    a = 2.0 * params.v / params.alpha
    return a + math.sqrt(a * a + params.r * params.r)


def filter_heading(
    p_i: Vec2,
    p_j: Vec2,
    phi: float,
    lambda_i: int,
    params: SafetyParams,
    tie_tol: float = TIE_TOL,
    strict: bool = False,
) -> FilterDecision:
    """Minimal heading correction that keeps airplane ``i`` safe w.r.t. ``j``.

    Args:
        p_i: Ego position.
        p_j: Other airplane's position.
        phi: Desired (cruising) heading.
        lambda_i: Preferred correction side (+1 or -1) when ``phi`` points
            exactly at the other airplane.
        params: Safety parameters.
        tie_tol: Angular band around the bearing treated as an exact tie.
        strict: Raise :class:`SafetyViolationError` when h < 0 instead of
            clamping the half-angle to pi/2.

    Returns:
        The commanded heading together with the activation flag and half-angle.
    """
    beta = bearing(p_i, p_j)
    h = cbf_value(p_i, p_j, params)
    violated = h < 0.0
    if violated and strict:
        raise SafetyViolationError("filter evaluated inside the safety margin")
    delta = half_angle_delta(p_i, p_j, params, clamp=True)
    phi = normalize_angle(phi)
    if delta == 0.0:
        return FilterDecision(phi, False, 0.0, Branch.UNCHANGED, beta, violated)
    e = normalize_angle(phi - beta)
    if abs(e) < tie_tol:
        side = 1 if lambda_i >= 0 else -1
        return FilterDecision(
            normalize_angle(beta + side * delta), True, delta, Branch.TIE_BREAK, beta, violated
        )
    if -delta < e < 0.0:
        return FilterDecision(
            normalize_angle(beta - delta), True, delta, Branch.CORRECTED_MINUS, beta, violated
        )
    if 0.0 < e < delta:
        return FilterDecision(
            normalize_angle(beta + delta), True, delta, Branch.CORRECTED_PLUS, beta, violated
        )
    return FilterDecision(phi, False, delta, Branch.UNCHANGED, beta, violated)


def cbf_condition_holds(
    p_i: Vec2, p_j: Vec2, u_i: Vec2, params: SafetyParams, tol: float = 0.0
) -> bool:
    """Decentralized CBF condition ``alpha/2 * h + 2 (p_i - p_j) . u_i >= -tol``."""
    h = cbf_value(p_i, p_j, params)
    g = 0.5 * params.alpha * h + 2.0 * ((p_i[0] - p_j[0]) * u_i[0] + (p_i[1] - p_j[1]) * u_i[1])
    return g >= -tol


def centralized_condition(p1: Vec2, p2: Vec2, u1: Vec2, u2: Vec2, params: SafetyParams) -> float:
    """Left-hand side of the joint (two-airplane) CBF condition."""
    h = cbf_value(p1, p2, params)
    return params.alpha * h + 2.0 * (
        (p1[0] - p2[0]) * (u1[0] - u2[0]) + (p1[1] - p2[1]) * (u1[1] - u2[1])
    )


def qp_oracle(
    p_i: Vec2,
    p_j: Vec2,
    phi: float,
    params: SafetyParams,
    grid_n: int = 3600,
    bisection_iters: int = 30,
) -> float:
    """Brute-force minimizer of ``|wrap(theta - phi)|`` s.t. ``cos(theta - beta) <= L``.

    A uniform heading grid finds the nearest feasible sample on each side of
    ``phi``; each is walked back to the constraint boundary by bisection and
    the cheaper of the two wins. Independent of :func:`filter_heading`: it
    never forms the half-angle explicitly.
    """
    if grid_n < 3600:
        raise ValueError("grid_n must be at least 3600")
    distance = math.hypot(p_i[0] - p_j[0], p_i[1] - p_j[1])
    if distance == 0.0:
        raise DegenerateGeometryError("oracle between coincident points")
    beta = math.atan2(p_j[1] - p_i[1], p_j[0] - p_i[0])
    h = cbf_value(p_i, p_j, params)
    level = _constraint_level(h, distance, params)

    def feasible(theta: float) -> bool:
        return math.cos(theta - beta) <= level

    phi = normalize_angle(phi)
    if feasible(phi):
        return phi

    offsets = np.linspace(-math.pi, math.pi, grid_n, endpoint=False)
    thetas = phi + offsets
    ok = np.cos(thetas - beta) <= level
    if not ok.any():
        raise RuntimeError("angular QP infeasible; cannot happen for h >= 0")
    # Refine on each side of phi separately; near ties the grid alone can
    # favour the wrong side by up to one sample.
    best_theta, best_cost = phi, math.inf
    for side in (offsets > 0, offsets < 0):
        cost = np.where(ok & side, np.abs(offsets), np.inf)
        k = int(np.argmin(cost))
        if not math.isfinite(cost[k]):
            continue
        lo, hi = float(thetas[k]), phi
        for _ in range(bisection_iters):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        if abs(lo - phi) < best_cost:
            best_theta, best_cost = lo, abs(lo - phi)
    return normalize_angle(best_theta)
