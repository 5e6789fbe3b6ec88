"""Fixed-step scenario loop.

Every step is synchronous: all airplanes look at the same snapshot, compute
their commands, then move together. Per airplane a step goes

1. pick the constraint peer (the most threatening other airplane),
2. filter the cruising heading against that peer,
3. classify the mode from the activation flag and the bearing rate implied by
   both airplanes' filtered velocities,
4. run the resolution strategy (interactive maneuver, unblocking decision),
5. integrate the dynamics, then check arrivals, separation and pathologies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from airblock.alt_controllers import potential_field_heading, vo_filter
from airblock.dynamics import KinematicState, step
from airblock.geometry import Vec2, bearing, bearing_rate, cruising_angle, normalize_angle
from airblock.modes import Mode, classify_mode, detect_deadlock, detect_livelock
from airblock.resolution import (
    Choice,
    Phase,
    Pose,
    PriorityDecision,
    ResolutionState,
    choose_priority,
    interactive_tick,
)
from airblock.safety_filter import Branch, FilterDecision, cbf_value, filter_heading
from airblock.sim.config import Controller, ScenarioConfig, Strategy

ACTIVATION_TOL = 1e-9
# consecutive Blocking samples needed before an unblocking decision is taken
CONFIRM_STEPS = 2


class EventKind(str, enum.Enum):
    BLOCKING_START = "BlockingStart"
    BLOCKING_END = "BlockingEnd"
    UNBLOCK_START = "UnblockStart"
    TARGET_ESTIMATED = "TargetEstimated"
    TEMPORARY_TARGET_REACHED = "TemporaryTargetReached"
    TARGET_REACHED = "TargetReached"
    SAFETY_VIOLATION = "SafetyViolation"
    DEADLOCK_FLAG = "DeadlockFlag"
    LIVELOCK_FLAG = "LivelockFlag"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    agent: str
    detail: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class AgentStep:
    position: Vec2
    heading: float
    theta_cmd: float
    mode: Mode
    delta: float
    activated: bool
    phase: Phase
    phi: float
    beta: float
    beta_rate: float
    peer: Optional[int]


@dataclass(frozen=True)
class TraceRow:
    time: float
    agents: tuple[AgentStep, ...]


@dataclass
class SimulationTrace:
    config: ScenarioConfig
    rows: list[TraceRow]
    events: list[Event]
    final_positions: list[Vec2]
    arrival_times: dict[str, float]
    min_separation: float
    estimates: dict[str, dict[str, Vec2]]

    @property
    def agent_ids(self) -> list[str]:
        return [a.id for a in self.config.agents]

    @property
    def completed(self) -> bool:
        return len(self.arrival_times) == len(self.config.agents)

    @property
    def completion_time(self) -> Optional[float]:
        if not self.completed:
            return None
        return max(self.arrival_times.values())

    def events_of(self, kind: EventKind, agent: Optional[str] = None) -> list[Event]:
        return [e for e in self.events if e.kind is kind and (agent is None or e.agent == agent)]

    def modes(self, index: int) -> list[Mode]:
        return [row.agents[index].mode for row in self.rows]

    def positions(self, index: int) -> np.ndarray:
        pts = [row.agents[index].position for row in self.rows]
        pts.append(self.final_positions[index])
        return np.asarray(pts, dtype=float)

    def blocking_episodes(self, index: int) -> list[tuple[float, float]]:
        """(start, end) times of each blocking episode; open episodes end at inf."""
        out: list[tuple[float, float]] = []
        start = None
        for row in self.rows:
            blocked = row.agents[index].mode is Mode.BLOCKING
            if blocked and start is None:
                start = row.time
            elif not blocked and start is not None:
                out.append((start, row.time))
                start = None
        if start is not None:
            out.append((start, math.inf))
        return out


def select_constraint_peer(
    index: int,
    positions: Sequence[Vec2],
    velocities: Sequence[Vec2],
    candidates: Sequence[int],
    r: float,
) -> Optional[int]:
    """Most threatening other airplane: smallest barrier value among those closing in.

    Falls back to the smallest barrier value overall when nobody is closing.
    Ties are broken by distance, then by index.
    """
    others = [j for j in candidates if j != index]
    if not others:
        return None
    p = positions[index]
    u = velocities[index]

    def key(j: int) -> tuple[float, float, int]:
        d = math.dist(p, positions[j])
        return (d * d - r * r, d, j)

    closing = []
    for j in others:
        rx = positions[j][0] - p[0]
        ry = positions[j][1] - p[1]
        wx = velocities[j][0] - u[0]
        wy = velocities[j][1] - u[1]
        if rx * wx + ry * wy < 0.0:
            closing.append(j)
    pool = closing or others
    return min(pool, key=key)


@dataclass
class _Agent:
    kin: KinematicState
    res: ResolutionState
    active: bool = True
    prev_cmd: Optional[float] = None
    pure_cruising: bool = False
    filter_active: bool = False
    blocking_run: int = 0
    blocking: bool = False
    deadlock_flagged: bool = False
    livelock_flagged: bool = False


def _velocity(v: float, heading: float) -> Vec2:
    return Vec2(v * math.cos(heading), v * math.sin(heading))


def run_scenario(config: ScenarioConfig, forced_yield: Optional[str] = None) -> SimulationTrace:
    """Simulate ``config`` until every airplane arrives or the horizon passes.

    ``forced_yield`` names an airplane that yields at its first confirmed
    blocking regardless of its priority rule; every other airplane with a
    strategy then never yields. Used to measure what each option costs.

    Raises:
        ConfigError: if the configuration breaks an invariant.
    """
    config.validate()
    cfg = config
    dyn = cfg.physics
    safety = cfg.safety
    tol = cfg.tolerances
    v, dt = dyn.v, dyn.dt
    reach = cfg.reach_tol
    n = len(cfg.agents)
    ids = [a.id for a in cfg.agents]
    agent_cfgs = cfg.agents

    agents = [
        _Agent(KinematicState(Vec2(*a.position), normalize_angle(a.initial_heading())),
               ResolutionState.initial(Vec2(*a.target)))
        for a in agent_cfgs
    ]
    rows: list[TraceRow] = []
    events: list[Event] = []
    arrivals: dict[str, float] = {}
    history: list[list[tuple[float, float]]] = [[tuple(a.kin.position)] for a in agents]
    in_violation: set[tuple[int, int]] = set()
    min_sep = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            min_sep = min(min_sep, math.dist(agents[i].kin.position, agents[j].kin.position))

    n_steps = int(math.floor(cfg.horizon / dt + 1e-9))
    check_every = max(1, int(round(cfg.pathology_check_every / dt)))
    dead_len = int(round(cfg.deadlock_window / dt))
    live_len = int(math.ceil(cfg.livelock_window_s / dt))

    for k in range(n_steps):
        t = k * dt
        active = [i for i in range(n) if agents[i].active]
        if not active:
            break
        positions = [a.kin.position for a in agents]
        velocities = [_velocity(v, a.kin.heading) if a.active else Vec2(0.0, 0.0) for a in agents]

        # -- temporary target bookkeeping, then filtering -------------------
        peers: dict[int, Optional[int]] = {}
        decisions: dict[int, FilterDecision] = {}
        phis: dict[int, float] = {}
        for i in active:
            ag = agents[i]
            p = ag.kin.position
            if ag.res.phase is Phase.UNBLOCKING and math.dist(p, ag.res.pursued) <= reach:
                ag.res = replace(ag.res, pursued=ag.res.target, phase=Phase.NORMAL)
                events.append(Event(t, EventKind.TEMPORARY_TARGET_REACHED, ids[i]))
            phi = cruising_angle(p, ag.res.pursued)
            phis[i] = phi
            # closing is judged on the nominal command the filter is about to
            # correct; the last filtered heading may point away from a threat
            # only because the filter just turned it
            own = list(velocities)
            own[i] = _velocity(v, phi)
            peer = select_constraint_peer(i, positions, own, active, cfg.r)
            peers[i] = peer
            decisions[i] = _control(cfg, i, phi, peer, positions, velocities, ag.kin.heading)

        filtered_u = {i: _velocity(v, decisions[i].theta) for i in active}

        # -- modes ----------------------------------------------------------
        modes: dict[int, Mode] = {}
        rates: dict[int, float] = {}
        for i in active:
            j = peers[i]
            if j is None:
                rates[i] = 0.0
                modes[i] = Mode.CRUISING
                continue
            rate = bearing_rate(positions[i], positions[j], filtered_u[i], filtered_u[j])
            rates[i] = rate
            modes[i] = classify_mode(decisions[i].activated, rate, tol.rate)

        # -- resolution -----------------------------------------------------
        commands: dict[int, float] = {}
        for i in active:
            ag = agents[i]
            agent_cfg = agent_cfgs[i]
            j = peers[i]
            u = filtered_u[i]
            if agent_cfg.strategy is not Strategy.NONE and j is not None:
                u = _resolve(cfg, i, j, ag, agents, agent_cfgs, modes, decisions, u, t, events, ids, forced_yield)
            commands[i] = math.atan2(u[1], u[0]) if u is not filtered_u[i] else decisions[i].theta

        # -- record ---------------------------------------------------------
        steps: list[AgentStep] = []
        for i in range(n):
            ag = agents[i]
            if not ag.active:
                steps.append(AgentStep(ag.kin.position, ag.kin.heading, ag.kin.heading, Mode.CRUISING,
                                       0.0, False, Phase.ARRIVED, ag.kin.heading, math.nan, 0.0, None))
                continue
            d = decisions[i]
            mode = modes[i]
            if mode is Mode.BLOCKING and not ag.blocking:
                events.append(Event(t, EventKind.BLOCKING_START, ids[i]))
            elif mode is not Mode.BLOCKING and ag.blocking:
                events.append(Event(t, EventKind.BLOCKING_END, ids[i]))
            ag.blocking = mode is Mode.BLOCKING
            steps.append(AgentStep(ag.kin.position, ag.kin.heading, normalize_angle(commands[i]), mode,
                                   d.delta, d.activated, ag.res.phase, phis[i], d.beta, rates[i], peers[i]))
        rows.append(TraceRow(t, tuple(steps)))

        # -- integrate ------------------------------------------------------
        for i in active:
            ag = agents[i]
            cmd = normalize_angle(commands[i])
            ag.kin = step(ag.kin, cmd, dyn, ag.prev_cmd)
            ag.prev_cmd = cmd
            ag.filter_active = decisions[i].activated
            # an observer reads the actual heading, which under the unicycle
            # model lags the command; only a settled heading reveals the target
            ag.pure_cruising = (
                not decisions[i].activated
                and commands[i] == decisions[i].theta
                and ag.res.phase is Phase.NORMAL
                and abs(normalize_angle(ag.kin.heading - cmd)) <= tol.angle
            )
        t_next = (k + 1) * dt
        for i in range(n):
            history[i].append(tuple(agents[i].kin.position))

        # -- arrivals -------------------------------------------------------
        for i in active:
            ag = agents[i]
            if ag.res.phase is not Phase.UNBLOCKING and math.dist(ag.kin.position, ag.res.target) <= reach:
                if ag.blocking:
                    events.append(Event(t_next, EventKind.BLOCKING_END, ids[i]))
                    ag.blocking = False
                events.append(Event(t_next, EventKind.TARGET_REACHED, ids[i]))
                arrivals[ids[i]] = t_next
                ag.active = False
                ag.res = replace(ag.res, phase=Phase.ARRIVED)

        # -- separation monitor ---------------------------------------------
        still = [i for i in active if agents[i].active]
        for a_idx in range(len(active)):
            i = active[a_idx]
            for j in active[a_idx + 1 :]:
                d = math.dist(agents[i].kin.position, agents[j].kin.position)
                if i in still and j in still:
                    min_sep = min(min_sep, d)
                    pair = (i, j)
                    if d < cfg.r - tol.violation:
                        if pair not in in_violation:
                            in_violation.add(pair)
                            detail = {"other": ids[j], "separation": d}
                            events.append(Event(t_next, EventKind.SAFETY_VIOLATION, ids[i], detail))
                    else:
                        in_violation.discard(pair)

        # -- pathologies ----------------------------------------------------
        if (k + 1) % check_every == 0:
            _check_pathologies(cfg, agents, still, peers, history, dead_len, live_len, t_next, events, ids, reach)

    return SimulationTrace(
        config=cfg,
        rows=rows,
        events=events,
        final_positions=[a.kin.position for a in agents],
        arrival_times=arrivals,
        min_separation=min_sep,
        estimates={ids[i]: {ids[j]: est for j, est in agents[i].res.estimates.items()} for i in range(n)},
    )


def _control(
    cfg: ScenarioConfig,
    i: int,
    phi: float,
    peer: Optional[int],
    positions: Sequence[Vec2],
    velocities: Sequence[Vec2],
    heading: float,
) -> FilterDecision:
    agent_cfg = cfg.agents[i]
    if peer is None:
        return FilterDecision(phi, False, 0.0, Branch.UNCHANGED, math.nan)
    p, q = positions[i], positions[peer]
    if agent_cfg.controller is Controller.CBF:
        return filter_heading(p, q, phi, agent_cfg.lam, cfg.safety, tie_tol=cfg.tolerances.tie)
    beta = bearing(p, q)
    if agent_cfg.controller is Controller.VO:
        u = vo_filter(p, q, velocities[peer], _velocity(cfg.physics.v, phi), cfg.vo_params)
        theta = math.atan2(u[1], u[0])
    else:
        theta = potential_field_heading(p, cfg.agents[i].target, q, cfg.pf, heading)
    theta = normalize_angle(theta)
    activated = abs(normalize_angle(theta - phi)) > ACTIVATION_TOL
    branch = Branch.UNCHANGED if not activated else Branch.CORRECTED_PLUS
    return FilterDecision(theta if activated else phi, activated, 0.0, branch, beta, cbf_value(p, q, cfg.safety) < 0)


def _resolve(cfg, i, j, ag, agents, agent_cfgs, modes, decisions, u, t, events, ids, forced_yield=None) -> Vec2:
    agent_cfg = agent_cfgs[i]
    mode = modes[i]
    res = ag.res
    ag.blocking_run = ag.blocking_run + 1 if mode is Mode.BLOCKING else 0
    if agent_cfg.strategy is Strategy.ADAPTIVE and not agent_cfg.knows_opponent_target:
        other = agents[j]
        pose = Pose(other.kin.position, other.kin.heading)
        u, res, estimated = interactive_tick(
            res, u, ag.kin.position, j, pose, other.pure_cruising, mode, cfg.safety,
            gain=cfg.interactive_gain, now=t, timeout=cfg.interaction_timeout,
            opponent_filter_active=other.filter_active,
        )
        if estimated:
            est = res.estimates[j]
            events.append(Event(t, EventKind.TARGET_ESTIMATED, ids[i],
                                {"opponent": ids[j], "x": est[0], "y": est[1]}))

    if mode is Mode.BLOCKING:
        if not res.decided and res.phase is Phase.NORMAL:
            if agent_cfg.knows_opponent_target:
                opp_target: Optional[Vec2] = Vec2(*agent_cfgs[j].target)
            else:
                opp_target = res.estimates.get(j)
            ready = (
                agent_cfg.strategy is Strategy.FIXED
                or opp_target is not None
                or res.interaction_abandoned
                or agent_cfg.knows_opponent_target
            )
            # commit only once blocking has been seen on consecutive steps; the
            # opponent's interactive maneuver breaks it again within one step
            if ag.blocking_run < CONFIRM_STEPS:
                ready = False
            if ready:
                decision: PriorityDecision = choose_priority(
                    ag.kin.position, res.target, decisions[i].theta, agents[j].kin.position,
                    opp_target, cfg.safety, adaptive=agent_cfg.strategy is Strategy.ADAPTIVE,
                )
                if forced_yield is not None:
                    choice = Choice.EGO_UNBLOCKS if ids[i] == forced_yield else Choice.OPPONENT_UNBLOCKS
                    decision = PriorityDecision(choice, False, decision.durations)
                res = replace(res, decided=True)
                if decision.choice is Choice.EGO_UNBLOCKS:
                    res = replace(res, pursued=Vec2(*agents[j].kin.position), phase=Phase.UNBLOCKING)
                    detail = {"opponent": ids[j], "tie_broken": decision.tie_broken}
                    if decision.durations is not None:
                        d = decision.durations
                        detail.update(t_b=d.t_b, t_u_i=d.t_u_i, t_u_j=d.t_u_j)
                    events.append(Event(t, EventKind.UNBLOCK_START, ids[i], detail))
    elif res.decided:
        res = replace(res, decided=False)
    ag.res = res
    return u


def _check_pathologies(cfg, agents, still, peers, history, dead_len, live_len, t, events, ids, reach) -> None:
    v, dt = cfg.physics.v, cfg.physics.dt
    for i in still:
        ag = agents[i]
        j = peers.get(i)
        if j is None or not agents[j].active:
            continue
        if not ag.deadlock_flagged and len(history[i]) > dead_len:
            windows = [history[i][-dead_len - 1 :], history[j][-dead_len - 1 :]]
            if detect_deadlock(windows, v, dt):
                ag.deadlock_flagged = True
                events.append(Event(t, EventKind.DEADLOCK_FLAG, ids[i], {"opponent": ids[j]}))
        if not ag.livelock_flagged and len(history[i]) > live_len:
            windows = [history[i][-live_len - 1 :], history[j][-live_len - 1 :]]
            targets = [agents[i].res.target, agents[j].res.target]
            if detect_livelock(windows, targets, v, dt, reach):
                ag.livelock_flagged = True
                events.append(Event(t, EventKind.LIVELOCK_FLAG, ids[i], {"opponent": ids[j]}))
