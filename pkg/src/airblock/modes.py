"""Mode classification and the analytic blocking predicates.

A filtered airplane is *blocking* when its bearing to the other airplane is
stationary (parallel flight) and *avoiding* when the bearing rotates.
Deadlock and livelock are judged over trailing windows of a trace.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from airblock.geometry import (
    Vec2,
    bearing,
    cruising_angle,
    encounter_point,
    normalize_angle,
)
from airblock.safety_filter import FilterDecision

RATE_TOL = 1e-3


class Mode(str, enum.Enum):
    CRUISING = "Cruising"
    AVOIDING = "Avoiding"
    BLOCKING = "Blocking"


class BlockingCase(str, enum.Enum):
    MUTUAL = "Mutual"
    ONE_CRUISING = "OneCruising"


@dataclass(frozen=True)
class BlockingMatch:
    s: int
    case: BlockingCase
    # index (0 or 1) of the airplane in blocking mode for the one-cruising case
    blocked: Optional[int] = None


@dataclass(frozen=True)
class PathologyFlags:
    deadlock: bool
    livelock: bool
    window: float


def classify_mode(decision: FilterDecision | bool, beta_rate: float, tol_rate: float = RATE_TOL) -> Mode:
    activated = decision if isinstance(decision, bool) else decision.activated
    if not activated:
        return Mode.CRUISING
    if abs(beta_rate) < tol_rate:
        return Mode.BLOCKING
    return Mode.AVOIDING


def _in_arc(x: float, delta: float) -> bool:
    return 0.0 <= x < delta


def blocking_condition(
    phi1: float,
    beta12: float,
    phi2: float,
    beta21: float,
    delta: float,
    tol: float = 1e-9,
) -> Optional[BlockingMatch]:
    """Check the mirrored-arc conditions for mutual or one-sided blocking.

    Mutual: some side ``s`` puts ``phi1`` in ``[0, delta)`` of the bearing on
    side ``s`` and ``phi2`` in ``[0, delta)`` on side ``-s``. One-sided: one
    airplane is in its arc while the other's cruising angle equals the first
    airplane's corrected heading (within ``tol``).
    """
    e1 = normalize_angle(phi1 - beta12)
    e2 = normalize_angle(phi2 - beta21)
    for s in (1, -1):
        if _in_arc(s * e1, delta) and _in_arc(-s * e2, delta):
            return BlockingMatch(s, BlockingCase.MUTUAL)
    for s in (1, -1):
        if _in_arc(s * e1, delta) and abs(normalize_angle(phi2 - (beta12 + s * delta))) < tol:
            return BlockingMatch(s, BlockingCase.ONE_CRUISING, blocked=0)
        if _in_arc(s * e2, delta) and abs(normalize_angle(phi1 - (beta21 + s * delta))) < tol:
            return BlockingMatch(s, BlockingCase.ONE_CRUISING, blocked=1)
    return None


def predict_blocking(
    p1: Vec2,
    t1: Vec2,
    p2: Vec2,
    t2: Vec2,
    angle_tol: float = 1e-6,
    dist_tol: float = 1e-6,
) -> bool:
    """Mirror-symmetric approach test for two cruising airplanes."""
    phi1 = cruising_angle(p1, t1)
    phi2 = cruising_angle(p2, t2)
    e1 = normalize_angle(phi1 - bearing(p1, p2))
    e2 = normalize_angle(phi2 - bearing(p2, p1))
    if abs(normalize_angle(e1 + e2)) > angle_tol:
        return False
    pc = encounter_point(p1, t1, p2, t2)
    if pc is None:
        return False
    d1 = math.hypot(p1[0] - pc[0], p1[1] - pc[1])
    d2 = math.hypot(p2[0] - pc[0], p2[1] - pc[1])
    return abs(d1 - d2) <= dist_tol


def self_unblock_check(
    phi_i: float, beta_ij: float, phi_j: float, beta_ji: float, tol: float = 1e-9
) -> bool:
    """True when exactly one airplane's target has become collinear with the pair."""
    on_i = abs(normalize_angle(phi_i - beta_ij)) <= tol
    on_j = abs(normalize_angle(phi_j - beta_ji)) <= tol
    return on_i != on_j


def _window_array(window: Sequence[Vec2] | np.ndarray) -> np.ndarray:
    arr = np.asarray(window, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("window must be a sequence of 2D positions")
    return arr


def _stationary(arr: np.ndarray, limit: float) -> bool:
    net = float(np.hypot(*(arr[-1] - arr[0])))
    excursion = float(np.max(np.hypot(arr[:, 0] - arr[0, 0], arr[:, 1] - arr[0, 1])))
    return net < limit and excursion < limit


def detect_deadlock(
    windows: Sequence[Sequence[Vec2] | np.ndarray],
    v: float,
    dt: float,
    factor: float = 0.1,
) -> bool:
    """Both airplanes hover in place while flying at constant speed.

    ``windows`` holds one position history per airplane, sampled every ``dt``.
    Stationarity means the net displacement *and* the largest excursion from
    the window start stay below ``factor * v * duration``.
    """
    arrays = [_window_array(w) for w in windows]
    if not arrays or any(len(a) < 2 for a in arrays):
        return False
    duration = (len(arrays[0]) - 1) * dt
    limit = factor * v * duration
    return all(_stationary(a, limit) for a in arrays)


def detect_livelock(
    windows: Sequence[Sequence[Vec2] | np.ndarray],
    targets: Sequence[Vec2],
    v: float,
    dt: float,
    reach_tol: float,
    factor: float = 0.1,
) -> bool:
    """Airplanes keep moving but make no net progress toward their targets.

    Per airplane: it never comes within ``reach_tol`` of its target, the
    distance to target decreases by less than ``factor * v * duration`` over
    the window, and it is not hovering in place (that would be deadlock).
    """
    arrays = [_window_array(w) for w in windows]
    if not arrays or any(len(a) < 2 for a in arrays):
        return False
    duration = (len(arrays[0]) - 1) * dt
    limit = factor * v * duration
    for arr, target in zip(arrays, targets):
        dist = np.hypot(arr[:, 0] - target[0], arr[:, 1] - target[1])
        if float(dist.min()) <= reach_tol:
            return False
        if dist[0] - dist[-1] >= limit:
            return False
        if _stationary(arr, limit):
            return False
    return True


def parallel_flight_intervals(
    times: Sequence[float],
    beta_rates: Sequence[float],
    paths: Sequence[np.ndarray],
    cruise_angles: Sequence[Sequence[float]],
    tol_rate: float = 1e-2,
    window: int = 4,
    min_deviation: float = 1e-3,
) -> list[tuple[float, float]]:
    """Stretches of parallel flight judged from trajectories alone.

    Step ``k`` counts when ``|beta_rates[k]|`` is below ``tol_rate`` and every
    airplane's net displacement over the next ``window`` steps points at least
    ``min_deviation`` away from its cruising angle at ``k``. Looking at net
    displacement instead of the per-step filter flag keeps controllers that
    alternate between corrected and uncorrected steps (plain velocity
    obstacles do) from splitting one episode into fragments.

    ``paths[a]`` has one more row than ``times``. Returns (start, end) pairs.
    """
    n = len(times)
    ok = np.abs(np.asarray(beta_rates, dtype=float)) < tol_rate
    for path, cruise in zip(paths, cruise_angles):
        path = np.asarray(path, dtype=float)
        cruise = np.asarray(cruise, dtype=float)
        ahead = np.minimum(np.arange(n) + window, len(path) - 1)
        disp = path[ahead] - path[:n]
        moving = np.hypot(disp[:, 0], disp[:, 1]) > 0.0
        dev = np.abs(_wrap(np.arctan2(disp[:, 1], disp[:, 0]) - cruise))
        ok &= moving & (dev >= min_deviation)
    out: list[tuple[float, float]] = []
    start = None
    for k in range(n):
        if ok[k] and start is None:
            start = k
        elif not ok[k] and start is not None:
            out.append((times[start], times[k]))
            start = None
    if start is not None:
        out.append((times[start], times[n - 1] + (times[1] - times[0] if n > 1 else 0.0)))
    return out


def blocking_probability_experiment(n_samples: int, seed: int, chunk: int = 1_000_000) -> float:
    """Monte Carlo estimate of the chance that a random encounter is blocking.

    The ego sits at the centre of a circle of radius r, cruising along +x; the
    opponent is placed uniformly on that circle with a uniform cruising angle.
    At separation r the half-angle is pi/2 whatever the other parameters, so
    only angles are sampled.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    delta = 0.5 * math.pi
    phi_ego = 0.0
    hits = 0
    remaining = n_samples
    while remaining > 0:
        m = min(chunk, remaining)
        psi = rng.uniform(-math.pi, math.pi, m)
        phi_opp = rng.uniform(-math.pi, math.pi, m)
        beta_ego = psi
        beta_opp = psi + math.pi
        e1 = _wrap(phi_ego - beta_ego)
        e2 = _wrap(phi_opp - beta_opp)
        mutual = ((e1 >= 0) & (e1 < delta) & (-e2 >= 0) & (-e2 < delta)) | (
            (-e1 >= 0) & (-e1 < delta) & (e2 >= 0) & (e2 < delta)
        )
        hits += int(np.count_nonzero(mutual))
        remaining -= m
    return hits / n_samples


def deadlock_frequency_experiment(n_samples: int, seed: int, tol: float = 0.0) -> float:
    """Frequency of the exact head-on (deadlock) condition under the same sampling."""
    rng = np.random.Generator(np.random.PCG64(seed))
    psi = rng.uniform(-math.pi, math.pi, n_samples)
    phi_opp = rng.uniform(-math.pi, math.pi, n_samples)
    head_on = (np.abs(_wrap(psi)) <= tol) & (np.abs(_wrap(phi_opp - (psi + math.pi))) <= tol)
    return float(np.count_nonzero(head_on)) / n_samples


def _wrap(a: np.ndarray | float) -> np.ndarray:
    return (np.asarray(a) + math.pi) % (2.0 * math.pi) - math.pi
