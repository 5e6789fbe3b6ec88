from airblock.sim.config import (
    AgentConfig,
    Controller,
    ScenarioConfig,
    Strategy,
    Tolerances,
)
from airblock.sim.engine import (
    Event,
    EventKind,
    SimulationTrace,
    run_scenario,
    select_constraint_peer,
)
from airblock.sim.generate import generate_blocking_scenario, generate_mirror_scenario
from airblock.sim.montecarlo import run_monte_carlo

__all__ = [
    "AgentConfig",
    "Controller",
    "Event",
    "EventKind",
    "ScenarioConfig",
    "SimulationTrace",
    "Strategy",
    "Tolerances",
    "generate_blocking_scenario",
    "run_monte_carlo",
    "run_scenario",
    "select_constraint_peer",
]
