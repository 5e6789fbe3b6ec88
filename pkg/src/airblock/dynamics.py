"""Fixed-step integration of the constant-speed airplane models.

Two models are supported: a single integrator whose heading jumps to the
commanded value, and a unicycle whose heading is driven toward the command by
a high-gain tracker ``a = -k * wrap(theta - theta_cmd) + theta_cmd_rate``.
Both use explicit Euler.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from airblock.errors import ConfigError
from airblock.geometry import Vec2, normalize_angle


class Model(str, enum.Enum):
    SINGLE_INTEGRATOR = "single_integrator"
    UNICYCLE = "unicycle"


@dataclass(frozen=True)
class KinematicState:
    position: Vec2
    heading: float


@dataclass(frozen=True)
class DynamicsParams:
    v: float = 5.0
    dt: float = 0.05
    model: Model = Model.SINGLE_INTEGRATOR
    heading_gain: float = 10.0

    def validate(self) -> None:
        if not (math.isfinite(self.v) and self.v > 0):
            raise ConfigError(f"speed v must be > 0, got {self.v}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"time step dt must be > 0, got {self.dt}")
        if self.model is Model.UNICYCLE:
            if not (math.isfinite(self.heading_gain) and self.heading_gain > 0):
                raise ConfigError(f"heading_gain must be > 0, got {self.heading_gain}")
            if self.heading_gain * self.dt >= 2.0:
                raise ConfigError(
                    f"unstable heading tracker: heading_gain*dt = "
                    f"{self.heading_gain * self.dt:g} >= 2"
                )


def step_single_integrator(
    state: KinematicState, commanded_heading: float, params: DynamicsParams
) -> KinematicState:
    step = params.v * params.dt
    p = state.position
    return KinematicState(
        Vec2(p.x + step * math.cos(commanded_heading), p.y + step * math.sin(commanded_heading)),
        normalize_angle(commanded_heading),
    )


def step_unicycle(
    state: KinematicState,
    commanded_heading: float,
    commanded_heading_rate: float,
    params: DynamicsParams,
) -> KinematicState:
    """Advance one Euler step; position uses the heading at the start of the step."""
    theta = state.heading
    turn = -params.heading_gain * normalize_angle(theta - commanded_heading) + commanded_heading_rate
    step = params.v * params.dt
    p = state.position
    return KinematicState(
        Vec2(p.x + step * math.cos(theta), p.y + step * math.sin(theta)),
        normalize_angle(theta + params.dt * turn),
    )


def heading_rate_estimate(previous_cmd: float, current_cmd: float, dt: float) -> float:
    """Finite-difference rate of the commanded heading, clamped to +-pi/dt."""
    rate = normalize_angle(current_cmd - previous_cmd) / dt
    limit = math.pi / dt
    return max(-limit, min(limit, rate))


def step(
    state: KinematicState,
    commanded_heading: float,
    params: DynamicsParams,
    previous_command: float | None = None,
) -> KinematicState:
    if params.model is Model.SINGLE_INTEGRATOR:
        return step_single_integrator(state, commanded_heading, params)
    rate = 0.0 if previous_command is None else heading_rate_estimate(
        previous_command, commanded_heading, params.dt
    )
    return step_unicycle(state, commanded_heading, rate, params)
