import math

import pytest
from hypothesis import given, strategies as st

from airblock.duration import NotBlockingError, blocking_bounds, option_durations, sweep_distance
from airblock.geometry import Vec2
from airblock.modes import Mode
from airblock.safety_filter import SafetyParams
from airblock.sim import Strategy, generate_blocking_scenario, generate_mirror_scenario, run_scenario
from airblock.sim.generate import scenario_rng

P = SafetyParams()
DT = 0.05


def test_sweep_distance_is_perpendicular_offset():
    # line through p and other is the y axis; target 40 m to its right
    assert sweep_distance(Vec2(0, 0), Vec2(40, 25), Vec2(0, 30)) == pytest.approx(40.0)
    assert sweep_distance(Vec2(0, 0), Vec2(0, 80), Vec2(0, 30)) == pytest.approx(0.0, abs=1e-12)


def test_bounds_symmetric_and_touching():
    p1, p2 = Vec2(0, -15), Vec2(0, 15)
    t1, t2 = Vec2(60, 50), Vec2(60, -50)
    b = blocking_bounds(p1, t1, p2, t2, P)
    assert b.t_lb == pytest.approx(60.0 / 5.0)
    assert b.t_ub == pytest.approx(b.t_lb)


def test_bounds_gap_term():
    p1, p2 = Vec2(0, -16), Vec2(0, 16)
    b = blocking_bounds(p1, Vec2(50, 100), p2, Vec2(70, -150), P)
    assert b.t_ub - b.t_lb == pytest.approx((32.0 - 30.0) / (2 * 5.0))
    assert b.t_lb == pytest.approx(50.0 / 5.0)


def test_bounds_reject_non_blocking():
    with pytest.raises(NotBlockingError):
        blocking_bounds(Vec2(0, -15), Vec2(-60, -50), Vec2(0, 15), Vec2(60, -50), P)


def test_option_examples():
    p_i, p_j = Vec2(0, -15), Vec2(0, 15)
    d = option_durations(p_i, Vec2(60, 50), p_j, Vec2(60, -50), P)
    assert d.t_u_i == pytest.approx(d.t_u_j)
    # by hand: o = origin, sweep 60, tangent sqrt(6100 - 900) twice, pi r arc
    expected = (2 * 60 + 2 * math.sqrt(6100 - 900) + math.pi * 30) / 5
    assert d.t_b == pytest.approx(expected)
    far = option_durations(p_i, Vec2(2000, 0), p_j, Vec2(5, -20), P)
    # yielding by the airplane whose neighbourhood holds T_j saves the detour
    assert far.t_u_j < far.t_u_i


def test_option_radicand_clamped():
    d = option_durations(Vec2(0, -15), Vec2(5, 5), Vec2(0, 15), Vec2(5, -5), P)
    assert all(math.isfinite(x) and x >= 0 for x in (d.t_b, d.t_u_i, d.t_u_j))


pts = st.builds(Vec2, st.floats(-300, 300), st.floats(-300, 300))


@given(pts, pts, pts, pts)
def test_scale_covariance(p1, t1, p2, t2):
    if math.dist(p1, p2) < 1.0 or math.dist(p1, t1) < 1.0 or math.dist(p2, t2) < 1.0:
        return
    dbl = lambda p: Vec2(2 * p[0], 2 * p[1])  # noqa: E731
    base = option_durations(p1, t1, p2, t2, P)
    p2x = SafetyParams(r=2 * P.r, alpha=P.alpha, v=2 * P.v)
    same = option_durations(dbl(p1), dbl(t1), dbl(p2), dbl(t2), p2x)
    for a, b in zip((base.t_b, base.t_u_i, base.t_u_j), (same.t_b, same.t_u_i, same.t_u_j)):
        assert b == pytest.approx(a, rel=1e-9)
    fixed_v = option_durations(dbl(p1), dbl(t1), dbl(p2), dbl(t2), SafetyParams(r=2 * P.r, alpha=P.alpha, v=P.v))
    assert fixed_v.t_u_i == pytest.approx(2 * base.t_u_i, rel=1e-9)
    b1 = blocking_bounds(p1, t1, p2, t2, P, check=False)
    b2 = blocking_bounds(dbl(p1), dbl(t1), dbl(p2), dbl(t2), p2x, check=False)
    assert b2.t_lb == pytest.approx(b1.t_lb, rel=1e-9, abs=1e-12)
    assert b2.t_ub == pytest.approx(b1.t_ub, rel=1e-9, abs=1e-12)


def _onset(trace):
    return next(k for k, row in enumerate(trace.rows) if row.agents[0].mode is Mode.BLOCKING)


def test_bounds_hold_on_generated_family():
    for n in range(10):
        cfg = generate_mirror_scenario(scenario_rng(77, n))
        tr = run_scenario(cfg)
        row = tr.rows[_onset(tr)]
        a, b = cfg.agents
        bb = blocking_bounds(row.agents[0].position, a.target, row.agents[1].position, b.target, P)
        start, end = tr.blocking_episodes(0)[0]
        assert bb.t_lb - DT <= end - start <= bb.t_ub + 2 * DT


def test_cheapest_estimate_matches_simulation():
    """The option with the smallest estimate should also be the cheapest when flown."""
    agree = 0
    for n in range(20):
        base = generate_blocking_scenario(scenario_rng(123, n), knows_opponent_target=True)
        maintain = run_scenario(base)
        rows = maintain.rows
        k = next(
            k for k in range(len(rows) - 1)
            if rows[k].agents[0].mode is Mode.BLOCKING and rows[k + 1].agents[0].mode is Mode.BLOCKING
        ) + 1
        a, b = base.agents
        est = option_durations(rows[k].agents[0].position, a.target, rows[k].agents[1].position, b.target, P)
        fixed = base.with_strategy(Strategy.FIXED)
        flown = [
            sum(tr.arrival_times.values())
            for tr in (maintain, run_scenario(fixed, forced_yield="A1"), run_scenario(fixed, forced_yield="A2"))
        ]
        estimates = [est.t_b, est.t_u_i, est.t_u_j]
        agree += estimates.index(min(estimates)) == flown.index(min(flown))
    assert agree >= 14
