import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leonetsim.geo import (
    CONSTANTS,
    ECEF,
    ECI,
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RADS,
    CartesianState,
    GeodeticPosition,
    PhysicalConstants,
    TimeGrid,
    central_angle,
    ecef_to_geodetic,
    eci_to_ecef,
    geodetic_to_ecef,
    great_circle_km,
    iso_at,
    los_distance_km,
    parse_epoch,
    sat_visible,
)

lat_s = st.floats(-89.9, 89.9)
lon_s = st.floats(-179.9, 179.9)


def haversine_km(lat1, lon1, lat2, lon2, r=6371.0):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * r * math.asin(math.sqrt(h))


def test_constants():
    assert CONSTANTS.earth_radius_km == 6371.0
    assert CONSTANTS.mu_km3s2 == 398600.4418
    assert CONSTANTS.light_speed_kms == 299792.458
    assert CONSTANTS.boltzmann_jk == 1.380649e-23
    assert CONSTANTS.earth_rotation_rads == 7.2921159e-5
    with pytest.raises(ValueError):
        PhysicalConstants(earth_radius_km=0.0)


@pytest.mark.parametrize(
    "lat, lon, expected",
    [(0, 0, (6371, 0, 0)), (90, 33, (0, 0, 6371)), (-90, 0, (0, 0, -6371))],
)
def test_geodetic_to_ecef_axes(lat, lon, expected):
    s = geodetic_to_ecef(GeodeticPosition(lat, lon))
    assert s.frame == ECEF
    np.testing.assert_allclose(s.position_km, expected, atol=1e-9)
    assert not s.velocity_kms.any()


def test_harbin_height():
    r = geodetic_to_ecef(GeodeticPosition(45, 127)).position_km
    assert np.linalg.norm(r) == pytest.approx(6371.0, abs=1e-9)
    assert r[2] == pytest.approx(4504.98, abs=0.01)


@pytest.mark.parametrize("bad", [(91, 0, 0), (0, 181, 0), (0, 0, -1)])
def test_geodetic_validation(bad):
    with pytest.raises(ValueError):
        GeodeticPosition(*bad)


@settings(max_examples=200, deadline=None)
@given(lat_s, lon_s, st.floats(0, 2000))
def test_geodetic_roundtrip(lat, lon, alt):
    back = ecef_to_geodetic(geodetic_to_ecef(GeodeticPosition(lat, lon, alt)).position_km)
    assert back.lat_deg == pytest.approx(lat, abs=1e-9)
    assert back.lon_deg == pytest.approx(lon, abs=1e-9)
    assert back.alt_km == pytest.approx(alt, abs=1e-9)


def test_eci_to_ecef_examples():
    r = CartesianState(ECI, np.array([7371.0, 0.0, 0.0]))
    np.testing.assert_allclose(eci_to_ecef(r, 0.0).position_km, [7371, 0, 0], atol=1e-12)
    day = 2 * math.pi / EARTH_ROTATION_RADS
    np.testing.assert_allclose(eci_to_ecef(r, day).position_km, [7371, 0, 0], rtol=1e-9, atol=1e-9 * 7371)
    np.testing.assert_allclose(eci_to_ecef(r, day / 4).position_km, [0, -7371, 0], atol=1e-8)


def test_eci_to_ecef_rejects_ecef():
    with pytest.raises(ValueError):
        eci_to_ecef(CartesianState(ECEF, np.ones(3)), 0.0)


def test_ecef_velocity_of_fixed_point_is_zero():
    # a point co-rotating with the Earth has zero Earth-fixed velocity
    r = np.array([7000.0, 0.0, 0.0])
    v = np.cross([0, 0, EARTH_ROTATION_RADS], r)
    out = eci_to_ecef(CartesianState(ECI, r, v), 0.0)
    np.testing.assert_allclose(out.velocity_kms, 0.0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=3), st.floats(0, 1e6))
def test_eci_to_ecef_preserves_norm(p, t):
    r = np.array(p)
    out = eci_to_ecef(CartesianState(ECI, r), t).position_km
    assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(r), rel=1e-9, abs=1e-9)


def test_great_circle_examples():
    a = GeodeticPosition(12, 34)
    assert great_circle_km(a, a) == 0.0
    anti = great_circle_km(GeodeticPosition(0, 0), GeodeticPosition(0, 180))
    assert anti == pytest.approx(20015.09, abs=0.01)
    hl = great_circle_km(GeodeticPosition(45, 127), GeodeticPosition(51, 0))
    assert hl == pytest.approx(haversine_km(45, 127, 51, 0), rel=1e-12)
    assert hl == pytest.approx(8188.08, abs=0.01)


@settings(max_examples=150, deadline=None)
@given(lat_s, lon_s, lat_s, lon_s, lat_s, lon_s)
def test_great_circle_metric(la1, lo1, la2, lo2, la3, lo3):
    a, b, c = GeodeticPosition(la1, lo1), GeodeticPosition(la2, lo2), GeodeticPosition(la3, lo3)
    ab = great_circle_km(a, b)
    assert ab == pytest.approx(great_circle_km(b, a), abs=1e-9)
    assert ab <= great_circle_km(a, c) + great_circle_km(c, b) + 1e-7
    assert ab == pytest.approx(haversine_km(la1, lo1, la2, lo2), abs=1e-6)


def test_great_circle_radius_scales():
    a, b = GeodeticPosition(0, 0), GeodeticPosition(0, 18)
    assert great_circle_km(a, b, 7371.0) == pytest.approx(7371 * math.radians(18), rel=1e-12)


def test_los_examples():
    assert los_distance_km(0) == 0.0
    assert los_distance_km(1000) == pytest.approx(7414.04, abs=0.01)
    assert los_distance_km(550) == pytest.approx(5407.62, abs=0.01)
    with pytest.raises(ValueError):
        los_distance_km(-1)


@given(st.floats(0, 5e4), st.floats(1e-3, 1e3))
def test_los_increasing(h, dh):
    assert los_distance_km(h + dh) > los_distance_km(h)


def test_sat_visible_examples():
    a = 7371.0
    r = np.array([a, 0, 0])
    assert sat_visible(r, r, 1000)
    assert not sat_visible(r, -r, 1000)
    chord = 2 * a * math.sin(math.radians(9))
    assert chord == pytest.approx(2306.157, abs=1e-3)
    b = np.array([a * math.cos(math.radians(18)), a * math.sin(math.radians(18)), 0])
    assert sat_visible(r, b, 1000)


@given(st.lists(st.floats(-8000, 8000), min_size=6, max_size=6))
def test_sat_visible_symmetric(v):
    a, b = np.array(v[:3]), np.array(v[3:])
    assert sat_visible(a, b, 1000) == sat_visible(b, a, 1000)


def test_central_angle_extremes():
    assert central_angle([1, 0, 0], [1, 0, 0]) == 0.0
    assert central_angle([1, 0, 0], [-1, 0, 0]) == pytest.approx(math.pi)


def test_timegrid():
    g = TimeGrid.from_duration(2000, 10)
    assert len(g) == 200
    assert g[0] == 0.0 and g[199] == 1990.0
    assert list(g)[:3] == [0.0, 10.0, 20.0]
    assert np.all(np.diff(g.timestamps) > 0)
    with pytest.raises(IndexError):
        g[200]
    with pytest.raises(ValueError):
        TimeGrid(0.0, 3)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)


def test_epoch_helpers():
    e = parse_epoch("2024-01-01T00:00:00Z")
    assert iso_at(e, 90.0) == "2024-01-01T00:01:30Z"
    assert iso_at(e, 0.5) == "2024-01-01T00:00:00.500000Z"
    assert parse_epoch("2024-01-01T00:00:00") == e
