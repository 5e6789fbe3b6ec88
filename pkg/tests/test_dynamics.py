import math

import pytest
from hypothesis import given, strategies as st

from airblock.dynamics import (
    DynamicsParams,
    KinematicState,
    Model,
    heading_rate_estimate,
    step,
    step_single_integrator,
    step_unicycle,
)
from airblock.errors import ConfigError
from airblock.geometry import Vec2, normalize_angle

angles = st.floats(-math.pi, math.pi, exclude_max=True, allow_nan=False)


def test_single_integrator_examples():
    s = step_single_integrator(KinematicState(Vec2(0, 0), 0.0), 0.0, DynamicsParams(v=5, dt=0.1))
    assert s.position == pytest.approx((0.5, 0.0))
    assert s.heading == 0.0
    s = step_single_integrator(KinematicState(Vec2(0, 0), 0.0), math.pi / 2, DynamicsParams(v=1, dt=1))
    assert s.position == pytest.approx((0.0, 1.0))
    assert s.heading == pytest.approx(math.pi / 2)


def test_single_integrator_linear_in_dt():
    start = KinematicState(Vec2(1.0, 2.0), 0.3)
    two = step_single_integrator(step_single_integrator(start, 0.3, DynamicsParams(dt=0.1)), 0.3, DynamicsParams(dt=0.1))
    one = step_single_integrator(start, 0.3, DynamicsParams(dt=0.2))
    assert two.position == pytest.approx(one.position, abs=1e-12)


@given(angles, angles)
def test_single_integrator_speed(h0, cmd):
    p = DynamicsParams(v=5, dt=0.05)
    s0 = KinematicState(Vec2(10.0, -3.0), h0)
    s1 = step_single_integrator(s0, cmd, p)
    assert math.dist(s0.position, s1.position) == pytest.approx(p.v * p.dt, rel=1e-12)
    assert -math.pi <= s1.heading < math.pi


def test_unicycle_straight_line_matches_integrator():
    p = DynamicsParams(model=Model.UNICYCLE, heading_gain=10, dt=0.05)
    s0 = KinematicState(Vec2(0, 0), 0.7)
    a = step_unicycle(s0, 0.7, 0.0, p)
    b = step_single_integrator(s0, 0.7, p)
    assert a.position == pytest.approx(b.position, abs=1e-12)
    assert a.heading == pytest.approx(b.heading)


def test_unicycle_heading_error_contracts():
    p = DynamicsParams(model=Model.UNICYCLE, heading_gain=10, dt=0.01)
    s = step_unicycle(KinematicState(Vec2(0, 0), 0.1), 0.0, 0.0, p)
    assert s.heading == pytest.approx(0.09, abs=1e-12)


def test_unstable_gain_rejected():
    with pytest.raises(ConfigError):
        DynamicsParams(model=Model.UNICYCLE, heading_gain=40, dt=0.05).validate()
    DynamicsParams(model=Model.UNICYCLE, heading_gain=39, dt=0.05).validate()


def test_heading_rate_estimate_clamped():
    dt = 0.05
    assert heading_rate_estimate(0.0, 0.1, dt) == pytest.approx(2.0)
    # wrap-around goes the short way
    assert heading_rate_estimate(math.pi - 0.05, -math.pi + 0.05, dt) == pytest.approx(2.0)
    assert abs(heading_rate_estimate(0.0, -math.pi, dt)) <= math.pi / dt


def _track(gain, dt, commands):
    """Max position gap between unicycle and integrator under the same commands."""
    pu = DynamicsParams(model=Model.UNICYCLE, heading_gain=gain, dt=dt)
    pi_ = DynamicsParams(dt=dt)
    su = si = KinematicState(Vec2(0, 0), commands[0])
    prev = None
    gap = 0.0
    for cmd in commands:
        su = step(su, cmd, pu, prev)
        si = step(si, cmd, pi_)
        prev = cmd
        gap = max(gap, math.dist(su.position, si.position))
    return gap


def test_unicycle_converges_to_integrator_with_gain():
    dt = 0.005
    commands = [normalize_angle(0.5 * math.sin(0.2 * k * dt) + (0.8 if k > 400 else 0.0)) for k in range(2000)]
    gaps = [_track(k, dt, commands) for k in (20, 50, 100)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_fig8_unicycle_gap_shrinks_with_gain():
    from dataclasses import replace

    from airblock.scenario_file import bundled_scenario
    from airblock.sim import Strategy, run_scenario

    base = bundled_scenario("fig8").with_strategy(Strategy.NONE)
    dt = 0.005
    ref = run_scenario(replace(base, physics=DynamicsParams(dt=dt), horizon=12.0))
    gaps = []
    for k in (20, 50, 100):
        tr = run_scenario(
            replace(base, physics=DynamicsParams(dt=dt, model=Model.UNICYCLE, heading_gain=k), horizon=12.0)
        )
        gaps.append(max(math.dist(a, b) for a, b in zip(tr.final_positions, ref.final_positions)))
    assert gaps[0] > gaps[1] > gaps[2]
