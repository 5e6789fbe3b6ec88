"""Random two-airplane encounters that start inside the mutual blocking region."""

from __future__ import annotations

import math

import numpy as np

from airblock.dynamics import DynamicsParams
from airblock.geometry import Vec2
from airblock.sim.config import AgentConfig, ScenarioConfig, Strategy

MIN_RANGE = 5.0  # target distance, in units of r
MAX_RANGE = 15.0
HORIZON_FACTOR = 6.0
MAX_TRIES = 1000


def generate_blocking_scenario(
    rng: np.random.Generator,
    r: float = 30.0,
    alpha: float = 3.0,
    physics: DynamicsParams | None = None,
    strategy: Strategy = Strategy.NONE,
    knows_opponent_target: bool = False,
    name: str = "",
) -> ScenarioConfig:
    """Draw one encounter whose cruising angles both sit inside the correction arcs.

    The airplanes start exactly ``r`` apart, where the arc half-width is a
    right angle. Each cruising angle is offset from its bearing by a draw in
    ``[0, pi/2)``, the two offsets having opposite signs so both airplanes get
    pushed to the same side and fly in parallel.
    """
    physics = physics or DynamicsParams()
    for _ in range(MAX_TRIES):
        orientation = rng.uniform(-math.pi, math.pi)
        side = 1.0 if rng.random() < 0.5 else -1.0
        a1, a2 = rng.uniform(0.0, 0.5 * math.pi, size=2)
        d1, d2 = rng.uniform(MIN_RANGE * r, MAX_RANGE * r, size=2)

        ux, uy = math.cos(orientation), math.sin(orientation)
        p1 = Vec2(-0.5 * r * ux, -0.5 * r * uy)
        p2 = Vec2(0.5 * r * ux, 0.5 * r * uy)
        beta12 = orientation
        beta21 = orientation + math.pi
        phi1 = beta12 + side * a1
        phi2 = beta21 - side * a2
        t1 = p1 + Vec2.polar(float(d1), phi1)
        t2 = p2 + Vec2.polar(float(d2), phi2)
        if math.dist(t1, t2) < r:
            continue
        horizon = HORIZON_FACTOR * max(d1, d2) / physics.v
        agents = (
            AgentConfig("A1", p1, t1, strategy=strategy, knows_opponent_target=knows_opponent_target),
            AgentConfig("A2", p2, t2, strategy=strategy, knows_opponent_target=knows_opponent_target),
        )
        return ScenarioConfig(
            agents=agents, physics=physics, r=r, alpha=alpha, horizon=float(horizon), name=name
        )
    raise RuntimeError("could not place targets at least r apart")  # pragma: no cover


def scenario_rng(batch_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for scenario ``index`` of a batch."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(batch_seed, spawn_key=(index,))))


def generate_mirror_scenario(
    rng: np.random.Generator,
    r: float = 30.0,
    alpha: float = 3.0,
    physics: DynamicsParams | None = None,
    strategy: Strategy = Strategy.NONE,
    knows_opponent_target: bool = True,
    horizon_factor: float = 4.0,
    name: str = "",
) -> ScenarioConfig:
    """Draw an encounter the blocking predictor flags.

    Both airplanes start mirrored about a line and cruise at mirrored angles,
    so the encounter point is equidistant. Target distances along the two
    rays are drawn independently and kept at least ``r`` apart, which lets the
    connecting line sweep over one target first instead of both at once.
    The horizon is ``horizon_factor`` times the longer straight-line time.
    """
    from airblock.modes import predict_blocking

    physics = physics or DynamicsParams()
    for _ in range(MAX_TRIES):
        half = rng.uniform(0.5 * r, 3.0 * r)
        ang = rng.uniform(0.1, 0.5 * math.pi - 0.1)
        d1, d2 = (float(x) for x in rng.uniform(MIN_RANGE * r, MAX_RANGE * r, size=2))
        rot = rng.uniform(-math.pi, math.pi)
        ox, oy = (float(x) for x in rng.uniform(-10.0 * r, 10.0 * r, size=2))
        c, s = math.cos(rot), math.sin(rot)

        def place(x: float, y: float) -> Vec2:
            return Vec2(ox + c * x - s * y, oy + s * x + c * y)

        p1, p2 = place(0.0, -half), place(0.0, half)
        t1 = place(d1 * math.cos(ang), -half + d1 * math.sin(ang))
        t2 = place(d2 * math.cos(ang), half - d2 * math.sin(ang))
        if abs(d1 - d2) < r or math.dist(t1, t2) < r:
            continue
        if not predict_blocking(p1, t1, p2, t2):
            continue
        agents = (
            AgentConfig("A1", p1, t1, strategy=strategy, knows_opponent_target=knows_opponent_target),
            AgentConfig("A2", p2, t2, strategy=strategy, knows_opponent_target=knows_opponent_target),
        )
        horizon = horizon_factor * max(d1, d2) / physics.v
        return ScenarioConfig(
            agents=agents, physics=physics, r=r, alpha=alpha, horizon=float(horizon), name=name
        )
    raise RuntimeError("could not draw a flagged mirror encounter")  # pragma: no cover
