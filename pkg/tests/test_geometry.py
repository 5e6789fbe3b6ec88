import math

import pytest
from hypothesis import given, strategies as st

from airblock.errors import DegenerateGeometryError, InvalidInputError
from airblock.geometry import (
    Vec2,
    bearing,
    bearing_rate,
    cruising_angle,
    encounter_point,
    line_intersection,
    normalize_angle,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)
coord = st.floats(-1e3, 1e3, allow_nan=False)
points = st.builds(Vec2, coord, coord)


@pytest.mark.parametrize(
    "a, expected", [(math.pi, -math.pi), (0.0, 0.0), (1.5 * math.pi, -0.5 * math.pi), (-math.pi, -math.pi)]
)
def test_normalize_examples(a, expected):
    assert normalize_angle(a) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_normalize_rejects_non_finite(bad):
    with pytest.raises(InvalidInputError):
        normalize_angle(bad)


@given(finite)
def test_normalize_range_and_idempotent(a):
    x = normalize_angle(a)
    assert -math.pi <= x < math.pi
    assert normalize_angle(x) == x


def test_normalize_periodic_grid():
    for a in [i * 0.37 - 7.0 for i in range(40)]:
        base = normalize_angle(a)
        for n in range(-5, 6):
            shifted = normalize_angle(a + 2.0 * math.pi * n)
            diff = abs(normalize_angle(shifted - base))
            assert diff < 1e-12


@pytest.mark.parametrize(
    "pi_, pj, expected",
    [((0, 0), (1, 0), 0.0), ((0, 0), (0, 2), 0.5 * math.pi), ((1, 1), (0, 1), -math.pi)],
)
def test_bearing_examples(pi_, pj, expected):
    assert bearing(Vec2(*pi_), Vec2(*pj)) == pytest.approx(expected, abs=1e-15)


def test_bearing_degenerate():
    with pytest.raises(DegenerateGeometryError):
        bearing(Vec2(1, 1), Vec2(1, 1))
    with pytest.raises(DegenerateGeometryError):
        bearing_rate(Vec2(1, 1), Vec2(1, 1), Vec2(0, 0), Vec2(1, 0))


@given(points, points)
def test_bearing_reverse(p, q):
    if math.dist(p, q) < 1e-6:
        return
    a = bearing(p, q)
    b = normalize_angle(bearing(q, p) + math.pi)
    assert abs(normalize_angle(a - b)) < 1e-12
    # unit vector points from p to q
    d = math.dist(p, q)
    assert math.cos(a) == pytest.approx((q[0] - p[0]) / d, abs=1e-9)
    assert math.sin(a) == pytest.approx((q[1] - p[1]) / d, abs=1e-9)


def test_bearing_rate_examples():
    assert bearing_rate(Vec2(0, 0), Vec2(1, 0), Vec2(1, 0), Vec2(1, 2)) == pytest.approx(2.0)
    assert bearing_rate(Vec2(0, 0), Vec2(3, 4), Vec2(1, 1), Vec2(1, 1)) == 0.0
    assert bearing_rate(Vec2(0, 0), Vec2(3, 4), Vec2(0, 0), Vec2(3, 4)) == 0.0


@given(points, points, points, points)
def test_bearing_rate_swap_symmetry(p, q, u, w):
    if math.dist(p, q) < 1e-3:
        return
    a = bearing_rate(p, q, u, w)
    b = bearing_rate(q, p, w, u)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_bearing_rate_matches_finite_difference():
    p, q = Vec2(3.0, -2.0), Vec2(40.0, 17.0)
    u, w = Vec2(4.0, 3.0), Vec2(-5.0, 0.5)
    eps = 1e-6
    b0 = bearing(p, q)
    b1 = bearing(p + u * eps, q + w * eps)
    assert bearing_rate(p, q, u, w) == pytest.approx(normalize_angle(b1 - b0) / eps, rel=1e-5)


def test_cruising_angle_examples():
    assert cruising_angle(Vec2(0, 0), Vec2(5, 5)) == pytest.approx(math.pi / 4)
    assert cruising_angle(Vec2(0, 0), Vec2(-1, 0)) == -math.pi
    assert cruising_angle(Vec2(0, -30), Vec2(80, 50)) == pytest.approx(math.pi / 4)


def test_line_intersection_examples():
    hit = line_intersection(Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, -1))
    assert hit.point == pytest.approx((1, 0))
    assert (hit.k1, hit.k2) == pytest.approx((1, 1))
    assert line_intersection(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 0)) is None
    s = 1 / math.sqrt(2)
    hit = line_intersection(Vec2(0, 0), Vec2(1, 0), Vec2(0, 2), Vec2(s, -s))
    # solved by hand: y = 2 - k2/sqrt2 = 0
    assert hit.point == pytest.approx((2, 0), abs=1e-12)
    assert hit.k1 == pytest.approx(2.0)
    assert hit.k2 == pytest.approx(2 * math.sqrt(2))


@given(points, points, points)
def test_line_intersection_round_trip(x, a, b):
    if math.dist(x, a) < 1e-2 or math.dist(x, b) < 1e-2:
        return
    da, db = (x - a) * (1 / math.dist(x, a)), (x - b) * (1 / math.dist(x, b))
    if abs(da[0] * db[1] - da[1] * db[0]) < 1e-3:
        return
    hit = line_intersection(a, da, b, db)
    assert hit is not None
    assert math.dist(hit.point, x) < 1e-9 * max(1.0, math.dist(x, a), math.dist(x, b)) * 100


def test_encounter_point():
    assert encounter_point(Vec2(0, -1), Vec2(0, 1), Vec2(-1, 0), Vec2(1, 0)) == pytest.approx((0, 0))
    assert encounter_point(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1)) is None
    # lines cross at (5, 0), outside both segments
    assert encounter_point(Vec2(0, 0), Vec2(1, 0), Vec2(5, 5), Vec2(5, 1)) is None


def test_cruising_angle_at_target():
    from airblock.errors import TargetReachedError

    with pytest.raises(TargetReachedError):
        cruising_angle(Vec2(2, 2), Vec2(2, 2))
