"""Scenario configuration: airplanes, physics, tolerances."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from airblock.alt_controllers import PFParams, VOParams
from airblock.dynamics import DynamicsParams
from airblock.errors import ConfigError
from airblock.geometry import Vec2, cruising_angle
from airblock.resolution import INTERACTION_TIMEOUT, INTERACTIVE_GAIN
from airblock.safety_filter import SafetyParams

MAX_AGENTS = 16


class Controller(str, enum.Enum):
    CBF = "cbf"
    VO = "vo"
    PF = "pf"


class Strategy(str, enum.Enum):
    NONE = "none"
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class AgentConfig:
    id: str
    position: Vec2
    target: Vec2
    heading: Optional[float] = None
    lam: int = 1
    controller: Controller = Controller.CBF
    strategy: Strategy = Strategy.NONE
    knows_opponent_target: bool = False

    def initial_heading(self) -> float:
        if self.heading is not None:
            return self.heading
        return cruising_angle(self.position, self.target)


@dataclass(frozen=True)
class Tolerances:
    tie: float = 1e-9
    rate: float = 1e-3
    # None means one step of travel, v * dt
    reach: Optional[float] = None
    angle: float = 1e-6
    violation: float = 1e-6


@dataclass(frozen=True)
class ScenarioConfig:
    agents: tuple[AgentConfig, ...]
    physics: DynamicsParams = field(default_factory=DynamicsParams)
    r: float = 30.0
    alpha: float = 3.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    horizon: float = 200.0
    rng_seed: int = 0
    interactive_gain: float = INTERACTIVE_GAIN
    interaction_timeout: float = INTERACTION_TIMEOUT
    vo: Optional[VOParams] = None
    pf: PFParams = field(default_factory=PFParams)
    deadlock_window: float = 5.0
    livelock_window: Optional[float] = None
    pathology_check_every: float = 1.0
    enforce_target_separation: bool = True
    name: str = ""

    @property
    def safety(self) -> SafetyParams:
        return SafetyParams(r=self.r, alpha=self.alpha, v=self.physics.v)

    @property
    def vo_params(self) -> VOParams:
        if self.vo is not None:
            return self.vo
        return VOParams(tau=10.0, r=self.r, v=self.physics.v)

    @property
    def reach_tol(self) -> float:
        if self.tolerances.reach is not None:
            return self.tolerances.reach
        return self.physics.v * self.physics.dt

    @property
    def livelock_window_s(self) -> float:
        if self.livelock_window is not None:
            return self.livelock_window
        return 2.0 * math.pi * self.r / self.physics.v

    def with_strategy(self, strategy: Strategy) -> "ScenarioConfig":
        return replace(self, agents=tuple(replace(a, strategy=strategy) for a in self.agents))

    def validate(self) -> None:
        """Raise :class:`ConfigError` describing the first broken invariant."""
        self.physics.validate()
        self.safety.validate()
        if not (2 <= len(self.agents) <= MAX_AGENTS):
            raise ConfigError(f"agent count must be in [2, {MAX_AGENTS}], got {len(self.agents)}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be > 0, got {self.horizon}")
        tol = self.tolerances
        for name in ("tie", "rate", "angle", "violation"):
            if not getattr(tol, name) > 0:
                raise ConfigError(f"tolerance {name} must be > 0")
        if tol.reach is not None and not tol.reach > 0:
            raise ConfigError("tolerance reach must be > 0")
        if self.interactive_gain <= 0:
            raise ConfigError("interactive_gain must be > 0")
        if self.deadlock_window < 2.0:
            raise ConfigError("deadlock_window must be at least 2 s")
        if self.livelock_window_s < 2.0 * math.pi * self.r / self.physics.v - 1e-9:
            raise ConfigError("livelock_window must cover one orbit period 2*pi*r/v")
        self.vo_params.validate()
        self.pf.validate(self.r)
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ConfigError("agent ids must be unique")
        for a in self.agents:
            for name, vec in (("position", a.position), ("target", a.target)):
                if not (math.isfinite(vec[0]) and math.isfinite(vec[1])):
                    raise ConfigError(f"agent {a.id}: {name} must be finite")
            if a.lam not in (-1, 1):
                raise ConfigError(f"agent {a.id}: lambda must be -1 or +1")
            if a.position == a.target:
                raise ConfigError(f"agent {a.id}: starts on its target")
            if a.controller is not Controller.CBF and a.strategy is not Strategy.NONE:
                raise ConfigError(f"agent {a.id}: resolution strategies need the cbf controller")
        for i, a in enumerate(self.agents):
            for b in self.agents[i + 1 :]:
                if math.dist(a.position, b.position) < self.r - 1e-9:
                    raise ConfigError(
                        f"agents {a.id} and {b.id} start {math.dist(a.position, b.position):.6g} m "
                        f"apart, below r = {self.r:g}"
                    )
                if self.enforce_target_separation and math.dist(a.target, b.target) < self.r:
                    raise ConfigError(f"targets of {a.id} and {b.id} are closer than r = {self.r:g}")
