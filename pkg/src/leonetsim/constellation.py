"""Walker-delta shells, circular propagation, stations and TLE export."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Sequence

import numpy as np

from .geo import (
    ECEF,
    ECI,
    EARTH_RADIUS_KM,
    MU_KM3_S2,
    CartesianState,
    GeodeticPosition,
    eci_to_ecef,
    geodetic_to_ecef,
    rotate_to_ecef,
)


class OutOfAvailability(ValueError):
    """A mobile station has no defined position at the requested time."""


@dataclass(frozen=True)
class WalkerConfig:
    name: str
    total_sats: int
    planes: int
    phasing: int
    inclination_deg: float
    altitude_km: float
    layer: int = 0

    def __post_init__(self):
        if self.total_sats < 1 or self.planes < 1:
            raise ValueError("total_sats and planes must be positive")
        if self.total_sats % self.planes:
            raise ValueError(f"planes P={self.planes} must divide total_sats T={self.total_sats}")
        if not 0 <= self.phasing < self.planes:
            raise ValueError(f"phasing F={self.phasing} must satisfy 0 <= F < P={self.planes}")
        if not 0 < self.inclination_deg <= 180:
            raise ValueError(f"inclination must be in (0, 180], got {self.inclination_deg}")
        if not self.altitude_km > 0:
            raise ValueError(f"altitude must be positive, got {self.altitude_km}")
        if self.layer < 0:
            raise ValueError("layer must be non-negative")

    @property
    def sats_per_plane(self) -> int:
        return self.total_sats // self.planes

    @property
    def semi_major_axis_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km


@dataclass(frozen=True, order=True)
class SatelliteId:
    layer: int
    plane: int
    phase: int
    flat_index: int

    @property
    def node_id(self) -> str:
        return satellite_node_id(self.layer, self.flat_index)


def satellite_node_id(layer: int, flat_index: int) -> str:
    return f"SAT{layer}-{flat_index:05d}"


@dataclass(frozen=True)
class CircularElements:
    """Circular orbit; ``arg_latitude_deg`` is the position at epoch."""

    semi_major_axis_km: float
    inclination_deg: float
    raan_deg: float
    arg_latitude_deg: float

    @property
    def mean_motion_rads(self) -> float:
        return math.sqrt(MU_KM3_S2 / self.semi_major_axis_km**3)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.mean_motion_rads


def orbital_period_s(a_km: float) -> float:
    return 2.0 * math.pi * math.sqrt(a_km**3 / MU_KM3_S2)


def generate_walker(cfg: WalkerConfig) -> list[tuple[SatelliteId, CircularElements]]:
    n_p = cfg.sats_per_plane
    a = cfg.semi_major_axis_km
    out = []
    for p in range(cfg.planes):
        raan = p * 360.0 / cfg.planes
        for f in range(n_p):
            u = (f * 360.0 / n_p + p * cfg.phasing * 360.0 / cfg.total_sats) % 360.0
            sid = SatelliteId(cfg.layer, p, f, p * n_p + f)
            out.append((sid, CircularElements(a, cfg.inclination_deg, raan, u)))
    return out


def _orbit_position(a, inc, raan, u):
    """Position on a circular orbit; angles in radians, broadcasting."""
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inc), np.sin(inc)
    return np.stack(
        [a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * (su * si)],
        axis=-1,
    )


def propagate(elements: CircularElements, t: float) -> CartesianState:
    n = elements.mean_motion_rads
    inc = math.radians(elements.inclination_deg)
    raan = math.radians(elements.raan_deg)
    u = math.radians(elements.arg_latitude_deg) + n * t
    r = _orbit_position(elements.semi_major_axis_km, inc, raan, u)
    # d/du of the position, scaled by du/dt
    v = _orbit_position(elements.semi_major_axis_km, inc, raan, u + math.pi / 2) * n
    return CartesianState(ECI, r, v)


class Shell:
    """Vectorised view of one Walker layer for fast per-timestamp propagation."""

    def __init__(self, cfg: WalkerConfig, isl_pattern=None, eisl=None):
        self.cfg = cfg
        self.isl_pattern = isl_pattern
        self.eisl = eisl
        self.sats = generate_walker(cfg)
        self.ids = [sid for sid, _ in self.sats]
        self.node_ids = [sid.node_id for sid in self.ids]
        self._a = cfg.semi_major_axis_km
        self._inc = math.radians(cfg.inclination_deg)
        self._raan = np.radians([el.raan_deg for _, el in self.sats])
        self._u0 = np.radians([el.arg_latitude_deg for _, el in self.sats])
        self._n = math.sqrt(MU_KM3_S2 / self._a**3)

    def __len__(self):
        return len(self.sats)

    def positions_eci(self, t: float) -> np.ndarray:
        return _orbit_position(self._a, self._inc, self._raan, self._u0 + self._n * t)

    def positions_ecef(self, t: float) -> np.ndarray:
        return rotate_to_ecef(self.positions_eci(t), t)


@dataclass(frozen=True)
class GroundStation:
    id: str
    name: str
    location: GeodeticPosition

    def position_ecef(self) -> np.ndarray:
        return geodetic_to_ecef(self.location).position_km


AIRCRAFT = "aircraft"
THIRD_PARTY_SATELLITE = "third_party_satellite"


@dataclass(frozen=True)
class OrbitSpec:
    altitude_km: float
    inclination_deg: float
    raan_deg: float = 0.0
    phase_deg: float = 0.0

    def elements(self) -> CircularElements:
        return CircularElements(EARTH_RADIUS_KM + self.altitude_km, self.inclination_deg, self.raan_deg, self.phase_deg)


# Placeholder orbit for a third-party satellite when none is configured.
DEFAULT_THIRD_PARTY_ORBIT = OrbitSpec(altitude_km=500.0, inclination_deg=97.4, raan_deg=0.0, phase_deg=0.0)


@dataclass(frozen=True)
class MobileStation:
    id: str
    kind: str
    waypoints: tuple[tuple[float, GeodeticPosition], ...] = ()
    orbit: OrbitSpec | None = None

    def __post_init__(self):
        if self.kind == AIRCRAFT:
            if len(self.waypoints) < 2:
                raise ValueError(f"{self.id}: aircraft needs at least two waypoints")
            times = [t for t, _ in self.waypoints]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError(f"{self.id}: waypoint times must be strictly increasing")
        elif self.kind != THIRD_PARTY_SATELLITE:
            raise ValueError(f"{self.id}: unknown mobile station kind {self.kind!r}")

    @property
    def span(self) -> tuple[float, float] | None:
        if self.kind != AIRCRAFT:
            return None
        return self.waypoints[0][0], self.waypoints[-1][0]


def _unit(lat_deg: float, lon_deg: float) -> np.ndarray:
    return geodetic_to_ecef(GeodeticPosition(lat_deg, lon_deg)).position_km / EARTH_RADIUS_KM


def great_circle_axis(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit normal of the great circle from ``a`` to ``b`` (unit vectors).

    Antipodal endpoints do not fix a circle. Then the path leaves ``a``
    heading north along its meridian, or east along the equator when ``a``
    lies on it. From a pole it follows a fixed meridian.
    """
    axis = np.cross(a, b)
    norm = np.linalg.norm(axis)
    if norm > 1e-12:
        return axis / norm
    z = np.array([0.0, 0.0, 1.0])
    if abs(a[2]) < 1e-12:
        return z
    if abs(abs(a[2]) - 1.0) < 1e-12:
        return np.array([0.0, -1.0, 0.0]) * np.sign(a[2])
    # plane containing a and the polar axis, oriented so motion starts northward
    east = np.cross(z, a)
    return -east / np.linalg.norm(east)


def slerp_great_circle(a: np.ndarray, b: np.ndarray, frac: float) -> np.ndarray:
    axis = great_circle_axis(a, b)
    total = math.atan2(float(np.dot(np.cross(a, b), axis)), float(np.dot(a, b)))
    if total < 0:
        total += 2.0 * math.pi
    ang = frac * total
    # rotate a about axis (Rodrigues; a is orthogonal to axis)
    return a * math.cos(ang) + np.cross(axis, a) * math.sin(ang)


def station_position(ms: MobileStation, t: float) -> CartesianState:
    """Earth-fixed position of a mobile station at time ``t``."""
    if ms.kind == THIRD_PARTY_SATELLITE:
        orbit = ms.orbit or DEFAULT_THIRD_PARTY_ORBIT
        return eci_to_ecef(propagate(orbit.elements(), t), t)
    t0, t1 = ms.span
    if t < t0 or t > t1:
        raise OutOfAvailability(f"{ms.id} has no position at t={t} (span {t0}..{t1})")
    for (ta, pa), (tb, pb) in zip(ms.waypoints, ms.waypoints[1:]):
        if ta <= t <= tb:
            break
    if t == ta:
        return geodetic_to_ecef(pa)
    if t == tb:
        return geodetic_to_ecef(pb)
    frac = (t - ta) / (tb - ta)
    direction = slerp_great_circle(_unit(pa.lat_deg, pa.lon_deg), _unit(pb.lat_deg, pb.lon_deg), frac)
    alt = pa.alt_km + frac * (pb.alt_km - pa.alt_km)
    return CartesianState(ECEF, direction * (EARTH_RADIUS_KM + alt))


def _tle_checksum(line: str) -> int:
    total = 0
    for ch in line:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _tle_epoch(epoch: datetime) -> str:
    start = datetime(epoch.year, 1, 1, tzinfo=epoch.tzinfo)
    day = 1.0 + (epoch - start).total_seconds() / 86400.0
    return f"{epoch.year % 100:02d}{day:012.8f}"


def tle_lines(sid: SatelliteId, el: CircularElements, epoch: datetime, catalog_number: int) -> tuple[str, str]:
    if not 0 <= catalog_number <= 99999:
        raise ValueError(f"catalog number {catalog_number} does not fit the 5-digit TLE field")
    rev_per_day = 86400.0 / el.period_s
    intl = f"{epoch.year % 100:02d}{sid.layer + 1:03d}{'A':<3}"
    line1 = f"1 {catalog_number:05d}U {intl:<8} {_tle_epoch(epoch)}  .00000000  00000-0  00000-0 0  999"
    line2 = (
        f"2 {catalog_number:05d} {el.inclination_deg:8.4f} {el.raan_deg % 360.0:8.4f} 0000000 "
        f"{0.0:8.4f} {el.arg_latitude_deg % 360.0:8.4f} {rev_per_day:11.8f}{0:5d}"
    )
    return line1 + str(_tle_checksum(line1)), line2 + str(_tle_checksum(line2))


def export_tle(sats: Sequence[tuple[SatelliteId, CircularElements]], epoch: datetime) -> str:
    """Two-line element sets, catalog number ``flat_index + 1``."""
    if len(sats) > 99999:
        raise ValueError(f"{len(sats)} satellites exceed the 5-digit TLE catalog field")
    chunks = []
    for sid, el in sats:
        l1, l2 = tle_lines(sid, el, epoch, sid.flat_index + 1)
        chunks.append(f"{l1}\n{l2}\n")
    return "".join(chunks)


def tle_checksum_ok(line: str) -> bool:
    return len(line) == 69 and line[-1].isdigit() and int(line[-1]) == _tle_checksum(line[:-1])
