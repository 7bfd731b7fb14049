import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockcast.geometry import (
    StripReflector,
    angle_from_endfire,
    los_clearance,
    mirror_point,
    reflect_path,
    reflection_geometry,
)

coord = st.floats(-100, 100, allow_nan=False)


def test_mirror_across_x_axis():
    np.testing.assert_allclose(mirror_point((0, 1), (0, 0), (1, 0)), (0, -1))


def test_mirror_across_diagonal():
    np.testing.assert_allclose(mirror_point((2, 0), (0, 0), (1, 1)), (0, 2), atol=1e-15)


@given(coord, coord, coord, coord, st.floats(0, 2 * np.pi))
def test_mirror_is_involution(px, py, lx, ly, a):
    d = (np.cos(a), np.sin(a))
    p = np.array([px, py])
    back = mirror_point(mirror_point(p, (lx, ly), d), (lx, ly), d)
    np.testing.assert_allclose(back, p, atol=1e-12 * max(1.0, np.abs(p).max(), abs(lx), abs(ly)))


def test_mirror_degenerate_line():
    with pytest.raises(ValueError):
        mirror_point((1, 1), (0, 0), (0, 0))


def test_reflect_symmetric():
    r = StripReflector((0, 0), 2.0, 90.0)
    g = reflect_path((-1, 1), (-1, -1), r)
    np.testing.assert_allclose(g.image_point, (1, 1), atol=1e-12)
    np.testing.assert_allclose(g.specular_point, (0, 0), atol=1e-12)
    assert g.path_length == pytest.approx(2 * np.sqrt(2))
    assert (g.s_a, g.s_b) == pytest.approx((-1, 1))


def test_reflect_specular_outside_strip():
    r = StripReflector((0, 0), 2.0, 90.0)
    g = reflect_path((-1, 3), (-1, 5), r)
    np.testing.assert_allclose(g.specular_point, (0, 4), atol=1e-12)
    assert g.s_a < g.s_b < 0


def test_reflect_opposite_sides():
    assert reflect_path((-1, 1), (1, 1), StripReflector((0, 0), 2.0, 90.0)) is None


def test_reflect_endpoint_on_line():
    with pytest.raises(ValueError):
        reflect_path((0, 5), (-1, 1), StripReflector((0, 0), 2.0, 90.0))


def _random_same_side(rng, n):
    c = rng.uniform(-20, 20, (n, 2))
    a = rng.uniform(0, 2 * np.pi, n)
    nrm = np.column_stack([-np.sin(a), np.cos(a)])
    u = np.column_stack([np.cos(a), np.sin(a)])
    tx = c + rng.uniform(0.5, 30, n)[:, None] * nrm + rng.uniform(-30, 30, n)[:, None] * u
    rx = c + rng.uniform(0.5, 30, n)[:, None] * nrm + rng.uniform(-30, 30, n)[:, None] * u
    return tx, rx, c, a, nrm


def test_image_length_equals_two_legs():
    rng = np.random.default_rng(0)
    tx, rx, c, a, _ = _random_same_side(rng, 1000)
    g = reflection_geometry(tx, rx, c, 1.0, a)
    assert g.valid.all()
    np.testing.assert_allclose(g.path_length, g.leg1 + g.leg2, rtol=1e-9)


def test_incidence_equals_reflection():
    rng = np.random.default_rng(1)
    tx, rx, c, a, nrm = _random_same_side(rng, 1000)
    g = reflection_geometry(tx, rx, c, 1.0, a)
    s = g.specular_point
    inc = np.arccos(np.einsum("ij,ij->i", tx - s, nrm) / np.linalg.norm(tx - s, axis=1))
    ref = np.arccos(np.einsum("ij,ij->i", rx - s, nrm) / np.linalg.norm(rx - s, axis=1))
    np.testing.assert_allclose(inc, ref, atol=1e-9)


def test_clearance_collinear():
    c = los_clearance((0, 0), (10, 0), (5, 0), (0, 1))
    assert (c.h, c.d1, c.d2) == pytest.approx((0, 5, 5))
    assert c.active


def test_clearance_below_line():
    c = los_clearance((0, 0), (10, 0), (5, -1), (0, 1))
    assert (c.h, c.d1, c.d2) == pytest.approx((-1, 5, 5))


def test_clearance_outside_segment():
    assert not los_clearance((0, 0), (10, 0), (20, 1), (0, 1)).active


def test_clearance_coincident_endpoints():
    with pytest.raises(ValueError):
        los_clearance((1, 1), (1, 1), (0, 0), (0, 1))


@settings(max_examples=200)
@given(coord, coord, coord, coord, coord, coord, st.floats(0, 2 * np.pi))
def test_clearance_antisymmetric(tx0, tx1, rx0, rx1, px, py, a):
    tx, rx = np.array([tx0, tx1]), np.array([rx0, rx1])
    if np.linalg.norm(rx - tx) < 1e-3:
        return
    d = (np.cos(a), np.sin(a))
    p = np.array([px, py])
    h1 = los_clearance(tx, rx, p, d).h
    h2 = los_clearance(tx, rx, mirror_point(p, tx, rx - tx), d).h
    assert h1 == pytest.approx(-h2, abs=1e-9)


@pytest.mark.parametrize(
    "direction, expected", [((0, 1), np.pi / 2), ((1, 0), 0.0), ((-1, 0), np.pi)]
)
def test_endfire_angles(direction, expected):
    assert angle_from_endfire((1, 0), direction) == pytest.approx(expected)


def test_endfire_zero_vector():
    with pytest.raises(ValueError):
        angle_from_endfire((1, 0), (0, 0))


def test_clearance_body_crossing_steep_path():
    # the tip's foot lies past rx, but the body hanging from it cuts the segment
    c = los_clearance((-20, 0), (2.857, 40), (2, 45), (0, 1))
    assert c.h > 0
    assert c.active
    assert 0 < c.d1 < np.hypot(22.857, 40)


def test_clearance_lit_side_uses_foot():
    c = los_clearance((0, 0), (10, 10), (6, 4), (0, 1))
    assert c.h < 0
    assert c.d1 == pytest.approx(10 / np.sqrt(2))
