"""Communication-free blocking resolution.

Each airplane runs two small state machines on top of its safety filter:

* an *unblocking* rule: on entering blocking it estimates the cost of three
  options (keep blocking, yield itself, let the other yield) and, if yielding
  is cheapest, temporarily retargets onto the other airplane's current
  position; the original target is restored once that point is reached.
* an *interactive* rule used while the other airplane's target is unknown:
  during blocking it flies away from the other airplane until that one drops
  back to cruising, logging the other's cruising poses and triangulating its
  target from two non-parallel ones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from airblock.duration import OptionDurations, option_durations
from airblock.geometry import Vec2, cruising_angle, line_intersection, normalize_angle
from airblock.modes import Mode
from airblock.safety_filter import FilterDecision, SafetyParams, filter_heading

SEPARATION_MIN = 0.01
INTERACTIVE_GAIN = 2.0
INTERACTION_TIMEOUT = 20.0
PRIORITY_TOL = 1e-6


class Phase(str, enum.Enum):
    NORMAL = "Normal"
    INTERACTING = "Interacting"
    UNBLOCKING = "Unblocking"
    ARRIVED = "Arrived"


class Choice(str, enum.Enum):
    MAINTAIN_BLOCKING = "MaintainBlocking"
    EGO_UNBLOCKS = "EgoUnblocks"
    OPPONENT_UNBLOCKS = "OpponentUnblocks"


@dataclass(frozen=True)
class PriorityDecision:
    choice: Choice
    tie_broken: bool = False
    durations: Optional[OptionDurations] = None


@dataclass(frozen=True)
class Pose:
    position: Vec2
    heading: float


@dataclass
class ResolutionState:
    """Per-airplane resolution memory.

    ``pursued`` is the target currently flown to; it differs from ``target``
    only while unblocking. ``estimates`` and ``pose_logs`` are keyed by the
    opponent's id so several encounters can be tracked.
    """

    target: Vec2
    pursued: Vec2
    phase: Phase = Phase.NORMAL
    estimates: dict = field(default_factory=dict)
    pose_logs: dict = field(default_factory=dict)
    interaction_start: Optional[float] = None
    interaction_abandoned: bool = False
    decided: bool = False

    @classmethod
    def initial(cls, target: Vec2) -> "ResolutionState":
        return cls(target=target, pursued=target)

    @property
    def unblocking(self) -> bool:
        return self.phase is Phase.UNBLOCKING


def opponent_on_left(own_heading: float, own_position: Vec2, opponent: Vec2) -> bool:
    """Whether ``opponent`` lies to the left of the ego's heading."""
    dx = opponent[0] - own_position[0]
    dy = opponent[1] - own_position[1]
    return math.cos(own_heading) * dy - math.sin(own_heading) * dx > 0.0


def adaptive_priority(
    d: OptionDurations, ego_is_right_of_opponent: bool, tol: float = PRIORITY_TOL
) -> PriorityDecision:
    """Pick the cheapest option; a tie between the two yield options goes by the
    right-hand rule.

    ``ego_is_right_of_opponent`` is true when the ego sees the other airplane
    on its left. That airplane gives way.
    """
    best = min(d.t_b, d.t_u_i, d.t_u_j)
    tie = abs(d.t_u_i - d.t_u_j) < tol
    if tie and min(d.t_u_i, d.t_u_j) <= d.t_b:
        choice = Choice.EGO_UNBLOCKS if ego_is_right_of_opponent else Choice.OPPONENT_UNBLOCKS
        return PriorityDecision(choice, True, d)
    if d.t_u_i == best:
        return PriorityDecision(Choice.EGO_UNBLOCKS, False, d)
    if d.t_u_j == best:
        return PriorityDecision(Choice.OPPONENT_UNBLOCKS, False, d)
    return PriorityDecision(Choice.MAINTAIN_BLOCKING, False, d)


def fixed_priority(ego_is_right_of_opponent: bool) -> PriorityDecision:
    choice = Choice.EGO_UNBLOCKS if ego_is_right_of_opponent else Choice.OPPONENT_UNBLOCKS
    return PriorityDecision(choice, True)


def _most_separated(poses: Sequence[Pose]) -> Optional[tuple[Pose, Pose, float]]:
    distinct: list[Pose] = []
    for pose in poses:
        if all(abs(normalize_angle(pose.heading - q.heading)) > 1e-12 for q in distinct):
            distinct.append(pose)
    best = None
    for a in range(len(distinct)):
        for b in range(a + 1, len(distinct)):
            sep = abs(normalize_angle(distinct[a].heading - distinct[b].heading))
            # rays at angle theta and theta + pi are just as parallel as equal ones
            sep = min(sep, math.pi - sep)
            if best is None or sep > best[2]:
                best = (distinct[a], distinct[b], sep)
    return best


def estimate_target(
    poses: Sequence[Pose], min_separation: float = SEPARATION_MIN
) -> Optional[Vec2]:
    """Intersect the heading rays of the two most angularly separated poses.

    Returns None with fewer than two usable poses, when the best pair is
    within ``min_separation`` of parallel, or when the crossing lies behind
    either pose.
    """
    pair = _most_separated(poses)
    if pair is None or pair[2] <= min_separation:
        return None
    a, b, _ = pair
    hit = line_intersection(
        a.position, Vec2.polar(1.0, a.heading), b.position, Vec2.polar(1.0, b.heading)
    )
    if hit is None or hit.k1 <= 0.0 or hit.k2 <= 0.0:
        return None
    return hit.point


def unblocking_tick(
    state: ResolutionState,
    position: Vec2,
    opponent_position: Vec2,
    lambda_i: int,
    params: SafetyParams,
    blocking: bool,
    decision: Optional[PriorityDecision],
    reach_tol: float,
) -> tuple[FilterDecision, ResolutionState]:
    """One pass of the unblocking rule for a single airplane.

    The heading comes from the filter applied to the pursued target. When the
    airplane is blocking and ``decision`` says it should yield, the pursued
    target moves onto the opponent's current position (used from the next
    tick on). A temporary target within ``reach_tol`` is dropped in favour of
    the original one.
    """
    new = replace(state)
    if new.unblocking and math.dist(position, new.pursued) <= reach_tol:
        new.pursued = new.target
        new.phase = Phase.NORMAL
    phi = cruising_angle(position, new.pursued)
    out = filter_heading(position, opponent_position, phi, lambda_i, params)
    if blocking and decision is not None and decision.choice is Choice.EGO_UNBLOCKS and not new.unblocking:
        new.pursued = Vec2(*opponent_position)
        new.phase = Phase.UNBLOCKING
    return out, new


def interactive_velocity(
    u: Vec2, position: Vec2, opponent_position: Vec2, v: float, gain: float = INTERACTIVE_GAIN
) -> Vec2:
    """Filtered velocity plus a repulsion of size ``gain * v`` away from the opponent,
    rescaled to speed ``v``."""
    rx = position[0] - opponent_position[0]
    ry = position[1] - opponent_position[1]
    d = math.hypot(rx, ry)
    if d > 0.0:
        rx, ry = rx / d, ry / d
    wx = u[0] + gain * v * rx
    wy = u[1] + gain * v * ry
    norm = math.hypot(wx, wy)
    if norm < 1e-9:
        wx, wy = rx, ry
        norm = math.hypot(wx, wy)
    return Vec2(v * wx / norm, v * wy / norm)


def interactive_tick(
    state: ResolutionState,
    u: Vec2,
    position: Vec2,
    opponent_id: object,
    opponent_pose: Pose,
    opponent_cruising: bool,
    own_mode: Mode,
    params: SafetyParams,
    gain: float = INTERACTIVE_GAIN,
    now: float = 0.0,
    timeout: float = INTERACTION_TIMEOUT,
    opponent_filter_active: Optional[bool] = None,
) -> tuple[Vec2, ResolutionState, bool]:
    """One pass of the interactive rule.

    ``opponent_cruising`` gates pose logging: only poses flown straight at the
    opponent's target are useful. ``opponent_filter_active`` decides when the
    maneuver may stop; it defaults to ``not opponent_cruising``.

    Returns the (possibly modified) velocity, the updated state and whether a
    target estimate was produced on this tick.
    """
    if opponent_filter_active is None:
        opponent_filter_active = not opponent_cruising
    new = replace(state, estimates=dict(state.estimates), pose_logs=dict(state.pose_logs))
    estimated = False
    if opponent_id not in new.estimates:
        if opponent_cruising:
            log = list(new.pose_logs.get(opponent_id, ()))
            log.append(opponent_pose)
            new.pose_logs[opponent_id] = log
            guess = estimate_target(log)
            if guess is not None:
                new.estimates[opponent_id] = guess
                estimated = True

    known = opponent_id in new.estimates
    # once started, keep flying away until the opponent's filter lets go: a
    # single repulsive step already breaks the parallel flight, and stopping
    # there flips straight back into blocking without revealing anything
    engaged = own_mode is Mode.BLOCKING or (
        new.phase is Phase.INTERACTING and opponent_filter_active
    )
    if engaged and not known and not new.interaction_abandoned:
        if new.interaction_start is None:
            new.interaction_start = now
        if now - new.interaction_start <= timeout:
            new.phase = Phase.INTERACTING
            return interactive_velocity(u, position, opponent_pose.position, params.v, gain), new, estimated
        new.interaction_abandoned = True
    if new.phase is Phase.INTERACTING:
        new.phase = Phase.NORMAL
    return u, new, estimated


def choose_priority(
    position: Vec2,
    target: Vec2,
    heading: float,
    opponent_position: Vec2,
    opponent_target: Optional[Vec2],
    params: SafetyParams,
    adaptive: bool,
) -> PriorityDecision:
    """Adaptive priority when the other target is available, else the right-hand rule."""
    yields = opponent_on_left(heading, position, opponent_position)
    if not adaptive or opponent_target is None:
        return fixed_priority(yields)
    d = option_durations(position, target, opponent_position, opponent_target, params)
    return adaptive_priority(d, yields)
