import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from airblock.errors import SafetyViolationError
from airblock.geometry import Vec2, bearing, normalize_angle
from airblock.safety_filter import (
    Branch,
    SafetyParams,
    cbf_condition_holds,
    cbf_value,
    centralized_condition,
    filter_heading,
    free_flight_threshold,
    half_angle_delta,
    qp_oracle,
)

P = SafetyParams()
angles = st.floats(-math.pi, math.pi, exclude_max=True, allow_nan=False)


def brute_force(p_i, p_j, phi, params, n=72000):
    """Closest feasible heading under the raw decentralized condition, by dense grid."""
    th = phi + np.linspace(-math.pi, math.pi, n, endpoint=False)
    h = cbf_value(p_i, p_j, params)
    g = 0.5 * params.alpha * h + 2 * params.v * (
        (p_i[0] - p_j[0]) * np.cos(th) + (p_i[1] - p_j[1]) * np.sin(th)
    )
    cost = np.where(g >= 0, np.abs(th - phi), np.inf)
    return float(th[np.argmin(cost)])


def at_distance(d, ang=0.0):
    return Vec2(0.0, 0.0), Vec2(d * math.cos(ang), d * math.sin(ang))


def test_cbf_value_examples():
    assert cbf_value(Vec2(0, 0), Vec2(30, 0), P) == 0.0
    assert cbf_value(Vec2(0, -30), Vec2(0, 30), P) == 2700.0
    assert cbf_value(Vec2(1, 1), Vec2(1, 1), P) == -900.0


def test_delta_examples():
    assert half_angle_delta(*at_distance(30.0), P) == pytest.approx(math.pi / 2)
    assert half_angle_delta(*at_distance(40.0), P) == 0.0
    # frozen from the brute-force boundary at d = 31 (independent of the closed form)
    p, q = at_distance(31.0)
    th = brute_force(p, q, 0.0, P, n=720000)
    assert half_angle_delta(p, q, P) == pytest.approx(abs(th), abs=2e-5)
    assert half_angle_delta(p, q, P) == pytest.approx(1.2711720012276, abs=1e-12)


def test_free_flight_threshold():
    d = free_flight_threshold(P)
    assert d == pytest.approx(33.51795046045805, abs=1e-12)
    # no heading on a 10^4 grid activates the filter just above the threshold
    p, q = at_distance(d + 1e-9)
    for k in range(10000):
        phi = -math.pi + 2 * math.pi * k / 10000
        assert not filter_heading(p, q, phi, 1, P).activated
    # just below it, heading straight at the other airplane does
    p, q = at_distance(d - 1e-6)
    assert filter_heading(p, q, 0.0, 1, P).activated


def test_free_flight_limits():
    assert free_flight_threshold(SafetyParams(r=30, alpha=1e12, v=5)) == pytest.approx(30.0)
    assert free_flight_threshold(SafetyParams(r=30, alpha=3, v=1e-12)) == pytest.approx(30.0)


def test_filter_examples():
    # bearing 0 at d = 31, so Delta is about 1.27
    p, q = at_distance(31.0)
    delta = half_angle_delta(p, q, P)
    tie = filter_heading(p, q, 0.0, 1, P)
    assert tie.branch is Branch.TIE_BREAK and tie.theta == pytest.approx(delta)
    tie = filter_heading(p, q, 0.0, -1, P)
    assert tie.theta == pytest.approx(-delta)
    minus = filter_heading(p, q, -0.3, 1, P)
    assert minus.branch is Branch.CORRECTED_MINUS and minus.theta == pytest.approx(-delta)
    assert minus.theta == pytest.approx(qp_oracle(p, q, -0.3, P), abs=1e-3)
    plus = filter_heading(p, q, 0.3, 1, P)
    assert plus.branch is Branch.CORRECTED_PLUS and plus.theta == pytest.approx(delta)
    out = filter_heading(p, q, delta + 0.01, 1, P)
    assert not out.activated and out.theta == pytest.approx(delta + 0.01)


def test_filter_strict_mode():
    p, q = at_distance(20.0)
    d = filter_heading(p, q, 0.0, 1, P)
    assert d.violated and d.delta == pytest.approx(math.pi / 2)
    with pytest.raises(SafetyViolationError):
        filter_heading(p, q, 0.0, 1, P, strict=True)


def test_oracle_examples():
    p, q = at_distance(50.0)
    assert qp_oracle(p, q, 0.2, P) == pytest.approx(0.2, abs=1e-15)
    p, q = at_distance(30.5)
    assert qp_oracle(p, q, -math.pi, P) == pytest.approx(-math.pi, abs=1e-15)
    with pytest.raises(ValueError):
        qp_oracle(p, q, 0.0, P, grid_n=100)


def test_cbf_condition_examples():
    p, q = at_distance(30.0)
    assert cbf_condition_holds(p, q, Vec2(-5.0, 0.0), P)
    assert not cbf_condition_holds(p, q, Vec2(5.0, 0.0), P)


states = st.tuples(
    st.floats(30.0, 40.0), angles, angles, st.floats(1.0, 10.0), st.floats(0.5, 10.0), st.floats(10.0, 50.0)
)


@given(states)
def test_filter_sound_minimal_and_oracle(state):
    d, ang, phi, alpha, v, r = state
    params = SafetyParams(r=r, alpha=alpha, v=v)
    dist = r + (d - 30.0) * r / 10.0  # spans [r, 2r]
    p, q = at_distance(dist, ang)
    dec = filter_heading(p, q, phi, 1, params)
    u = Vec2(v * math.cos(dec.theta), v * math.sin(dec.theta))
    assert cbf_condition_holds(p, q, u, params, tol=1e-7 * dist * v)
    assert 0.0 <= dec.delta <= math.pi / 2
    assert dec.activated == (abs(normalize_angle(dec.theta - normalize_angle(phi))) > 1e-12)
    if dec.activated:
        assert abs(normalize_angle(dec.theta - bearing(p, q))) == pytest.approx(dec.delta, abs=1e-9)
    e = abs(normalize_angle(phi - bearing(p, q)))
    if e > 1e-6:
        assert abs(normalize_angle(qp_oracle(p, q, phi, params) - dec.theta)) < 1e-3


@given(st.floats(1.0, 10.0), st.floats(0.5, 10.0), st.floats(10.0, 50.0))
def test_delta_monotone(alpha, v, r):
    params = SafetyParams(r=r, alpha=alpha, v=v)
    hi = free_flight_threshold(params)
    ds = np.linspace(r, hi, 50)
    deltas = [half_angle_delta(*at_distance(float(d)), params) for d in ds]
    assert all(a >= b - 1e-12 for a, b in zip(deltas, deltas[1:]))


@given(st.tuples(*(st.floats(-100, 100) for _ in range(8))))
def test_decentralized_sums_to_centralized(xs):
    p1, p2, u1, u2 = Vec2(*xs[0:2]), Vec2(*xs[2:4]), Vec2(*xs[4:6]), Vec2(*xs[6:8])
    h = cbf_value(p1, p2, P)
    g1 = 0.5 * P.alpha * h + 2 * ((p1[0] - p2[0]) * u1[0] + (p1[1] - p2[1]) * u1[1])
    g2 = 0.5 * P.alpha * h + 2 * ((p2[0] - p1[0]) * u2[0] + (p2[1] - p1[1]) * u2[1])
    assert g1 + g2 == pytest.approx(centralized_condition(p1, p2, u1, u2, P), rel=1e-9, abs=1e-6)


def test_oracle_agrees_with_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(200):
        d = rng.uniform(30.0, 34.0)
        p, q = at_distance(d, rng.uniform(-math.pi, math.pi))
        phi = rng.uniform(-math.pi, math.pi)
        if abs(normalize_angle(phi - bearing(p, q))) < 1e-3:
            continue
        ref = brute_force(p, q, phi, P)
        assert abs(normalize_angle(qp_oracle(p, q, phi, P) - ref)) < 2e-4


def _distance_for_delta(target, params):
    lo, hi = params.r, free_flight_threshold(params)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if half_angle_delta(*at_distance(mid), params) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_filter_literal_examples():
    p, q = at_distance(_distance_for_delta(0.9, P))
    dec = filter_heading(p, q, -0.3, 1, P)
    assert dec.theta == pytest.approx(-0.9, abs=1e-9)
    assert dec.theta == pytest.approx(brute_force(p, q, -0.3, P), abs=1e-3)
    p, q = at_distance(_distance_for_delta(0.8, P))
    assert filter_heading(p, q, 0.0, 1, P).theta == pytest.approx(0.8, abs=1e-9)
