"""JSON scenario files: parsing, serialization and the bundled examples.

Parsing happens in two stages. The document is first checked for shape and
types (a :class:`ScenarioParseError` names the line or the field path), then
turned into a :class:`ScenarioConfig` whose own invariants are checked by
``validate`` (a :class:`ConfigError`).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from airblock.alt_controllers import PFParams, VOParams
from airblock.dynamics import DynamicsParams, Model
from airblock.errors import AirblockError
from airblock.geometry import Vec2
from airblock.sim.config import AgentConfig, Controller, ScenarioConfig, Strategy, Tolerances

SCHEMA_VERSION = 1
BUNDLED = ("fig8", "deadlock", "livelock", "four-plane", "mirror")


class ScenarioParseError(AirblockError):
    """The document is not valid JSON or does not match the scenario schema."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class _Physics(_Strict):
    v: float = 5.0
    dt: float = 0.05
    model: Model = Model.SINGLE_INTEGRATOR
    heading_gain: float = 10.0


class _Tolerances(_Strict):
    tie: float = 1e-9
    rate: float = 1e-3
    reach: Optional[float] = None
    angle: float = 1e-6
    violation: float = 1e-6


class _VO(_Strict):
    tau: float = 10.0


class _PF(_Strict):
    k_att: float = 1.0
    k_rep: float = 2000.0
    influence_radius: float = 60.0


class _Agent(_Strict):
    id: str = Field(pattern=r"^[A-Za-z0-9_-]{1,32}$")
    position: tuple[float, float]
    target: tuple[float, float]
    heading: Optional[float] = None
    lam: Literal[-1, 1] = Field(1, alias="lambda")
    controller: Controller = Controller.CBF
    strategy: Strategy = Strategy.NONE
    knows_opponent_target: bool = False


class _Scenario(_Strict):
    schema_version: Literal[1]
    name: str = ""
    agents: list[_Agent]
    physics: _Physics = _Physics()
    r: float = 30.0
    alpha: float = 3.0
    tolerances: _Tolerances = _Tolerances()
    horizon: float = 200.0
    rng_seed: int = Field(0, ge=0, lt=2**64)
    interactive_gain: Optional[float] = None
    interaction_timeout: Optional[float] = None
    vo: Optional[_VO] = None
    pf: _PF = _PF()
    deadlock_window: float = 5.0
    livelock_window: Optional[float] = None
    pathology_check_every: float = 1.0
    enforce_target_separation: bool = True


def _to_config(doc: _Scenario) -> ScenarioConfig:
    extra = {}
    if doc.interactive_gain is not None:
        extra["interactive_gain"] = doc.interactive_gain
    if doc.interaction_timeout is not None:
        extra["interaction_timeout"] = doc.interaction_timeout
    return ScenarioConfig(
        agents=tuple(
            AgentConfig(
                id=a.id,
                position=Vec2(*a.position),
                target=Vec2(*a.target),
                heading=a.heading,
                lam=a.lam,
                controller=a.controller,
                strategy=a.strategy,
                knows_opponent_target=a.knows_opponent_target,
            )
            for a in doc.agents
        ),
        physics=DynamicsParams(**doc.physics.model_dump()),
        r=doc.r,
        alpha=doc.alpha,
        tolerances=Tolerances(**doc.tolerances.model_dump()),
        horizon=doc.horizon,
        rng_seed=doc.rng_seed,
        vo=None if doc.vo is None else VOParams(tau=doc.vo.tau, r=doc.r, v=doc.physics.v),
        pf=PFParams(**doc.pf.model_dump()),
        deadlock_window=doc.deadlock_window,
        livelock_window=doc.livelock_window,
        pathology_check_every=doc.pathology_check_every,
        enforce_target_separation=doc.enforce_target_separation,
        name=doc.name,
        **extra,
    )


def _format_validation(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"field {loc}: {item['msg']}")
    return "\n".join(lines)


def parse_scenario(text: str, validate: bool = True) -> ScenarioConfig:
    """Build a config from JSON text.

    Raises:
        ScenarioParseError: malformed JSON or a schema mismatch.
        ConfigError: well-formed document whose values break an invariant
            (only when ``validate`` is true).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ScenarioParseError("line 1: top level must be a JSON object")
    if "schema_version" not in raw:
        raise ScenarioParseError("field schema_version: missing")
    try:
        doc = _Scenario.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioParseError(_format_validation(exc)) from None
    config = _to_config(doc)
    if validate:
        config.validate()
    return config


def load_scenario(path: str | Path, validate: bool = True) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"), validate=validate)


def scenario_to_dict(config: ScenarioConfig) -> dict:
    """Plain-data form of ``config``; ``parse_scenario`` inverts it exactly."""
    p = config.physics
    t = config.tolerances
    return {
        "schema_version": SCHEMA_VERSION,
        "name": config.name,
        "agents": [
            {
                "id": a.id,
                "position": [a.position[0], a.position[1]],
                "target": [a.target[0], a.target[1]],
                "heading": a.heading,
                "lambda": a.lam,
                "controller": a.controller.value,
                "strategy": a.strategy.value,
                "knows_opponent_target": a.knows_opponent_target,
            }
            for a in config.agents
        ],
        "physics": {"v": p.v, "dt": p.dt, "model": p.model.value, "heading_gain": p.heading_gain},
        "r": config.r,
        "alpha": config.alpha,
        "tolerances": {
            "tie": t.tie,
            "rate": t.rate,
            "reach": t.reach,
            "angle": t.angle,
            "violation": t.violation,
        },
        "horizon": config.horizon,
        "rng_seed": config.rng_seed,
        "interactive_gain": config.interactive_gain,
        "interaction_timeout": config.interaction_timeout,
        "vo": None if config.vo is None else {"tau": config.vo.tau},
        "pf": {
            "k_att": config.pf.k_att,
            "k_rep": config.pf.k_rep,
            "influence_radius": config.pf.influence_radius,
        },
        "deadlock_window": config.deadlock_window,
        "livelock_window": config.livelock_window,
        "pathology_check_every": config.pathology_check_every,
        "enforce_target_separation": config.enforce_target_separation,
    }


def serialize_scenario(config: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(config), indent=2) + "\n"


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a bundled ``<name>.scenario`` file."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario {name!r}; available: {', '.join(BUNDLED)}")
    return Path(str(resources.files("airblock") / "scenarios" / f"{name}.scenario"))


def bundled_scenario(name: str) -> ScenarioConfig:
    return load_scenario(bundled_scenario_path(name))
