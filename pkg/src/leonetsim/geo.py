"""Constants, frames and spherical-Earth geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

EARTH_RADIUS_KM = 6371.0
MU_KM3_S2 = 398600.4418
LIGHT_SPEED_KMS = 299792.458
BOLTZMANN_JK = 1.380649e-23
EARTH_ROTATION_RADS = 7.2921159e-5

ECI = "ECI"
ECEF = "ECEF"


@dataclass(frozen=True)
class PhysicalConstants:
    earth_radius_km: float = EARTH_RADIUS_KM
    mu_km3s2: float = MU_KM3_S2
    light_speed_kms: float = LIGHT_SPEED_KMS
    boltzmann_jk: float = BOLTZMANN_JK
    earth_rotation_rads: float = EARTH_ROTATION_RADS

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class GeodeticPosition:
    lat_deg: float
    lon_deg: float
    alt_km: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon_deg}")
        if not self.alt_km >= 0.0:
            raise ValueError(f"altitude must be >= 0: {self.alt_km}")


@dataclass(frozen=True)
class CartesianState:
    frame: str
    position_km: np.ndarray
    velocity_kms: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.frame not in (ECI, ECEF):
            raise ValueError(f"unknown frame {self.frame!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Evenly spaced simulation timestamps ``epoch_s + i * step_s``."""

    step_s: float
    count: int
    epoch_s: float = 0.0

    def __post_init__(self):
        if not self.step_s > 0:
            raise ValueError(f"step_s must be positive, got {self.step_s}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    @classmethod
    def from_duration(cls, duration_s: float, step_s: float, epoch_s: float = 0.0) -> "TimeGrid":
        return cls(step_s=step_s, count=max(1, int(round(duration_s / step_s))), epoch_s=epoch_s)

    def __len__(self):
        return self.count

    def __getitem__(self, i: int) -> float:
        if not 0 <= i < self.count:
            raise IndexError(i)
        return self.epoch_s + i * self.step_s

    def __iter__(self):
        return (self.epoch_s + i * self.step_s for i in range(self.count))

    @property
    def timestamps(self) -> np.ndarray:
        return self.epoch_s + self.step_s * np.arange(self.count, dtype=np.float64)


def parse_epoch(text: str) -> datetime:
    """Parse an ISO-8601 epoch; naive times are taken as UTC."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def iso_at(epoch: datetime, t: float) -> str:
    """ISO-8601 UTC string for ``epoch + t`` seconds."""
    stamp = epoch + timedelta(seconds=t)
    if stamp.microsecond:
        return stamp.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def geodetic_to_ecef(p: GeodeticPosition) -> CartesianState:
    lat = math.radians(p.lat_deg)
    lon = math.radians(p.lon_deg)
    r = EARTH_RADIUS_KM + p.alt_km
    pos = np.array([r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat)])
    return CartesianState(ECEF, pos)


def ecef_to_geodetic(position_km) -> GeodeticPosition:
    x, y, z = (float(v) for v in position_km)
    r = math.sqrt(x * x + y * y + z * z)
    lat = math.degrees(math.asin(max(-1.0, min(1.0, z / r))))
    lon = math.degrees(math.atan2(y, x))
    return GeodeticPosition(lat, lon, max(0.0, r - EARTH_RADIUS_KM))


def earth_rotation_angle(t: float) -> float:
    """Greenwich angle at ``t`` seconds after epoch (zero at epoch)."""
    return EARTH_ROTATION_RADS * t


def rotate_to_ecef(positions_eci: np.ndarray, t: float) -> np.ndarray:
    """Rotate ECI positions (..., 3) into the Earth-fixed frame at time ``t``."""
    th = earth_rotation_angle(t)
    c, s = math.cos(th), math.sin(th)
    p = np.asarray(positions_eci, dtype=np.float64)
    out = np.empty_like(p)
    out[..., 0] = c * p[..., 0] + s * p[..., 1]
    out[..., 1] = -s * p[..., 0] + c * p[..., 1]
    out[..., 2] = p[..., 2]
    return out


def eci_to_ecef(s: CartesianState, t: float) -> CartesianState:
    if s.frame != ECI:
        raise ValueError(f"expected an ECI state, got {s.frame}")
    r = rotate_to_ecef(s.position_km, t)
    v = rotate_to_ecef(s.velocity_kms, t)
    # transport term -omega x r
    v = v - np.cross([0.0, 0.0, EARTH_ROTATION_RADS], r)
    return CartesianState(ECEF, r, v)


def central_angle(u, v) -> float:
    """Angle in radians between two position vectors (robust near 0 and pi)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


def great_circle_km(a: GeodeticPosition, b: GeodeticPosition, radius_km: float = EARTH_RADIUS_KM) -> float:
    ua = geodetic_to_ecef(GeodeticPosition(a.lat_deg, a.lon_deg)).position_km
    ub = geodetic_to_ecef(GeodeticPosition(b.lat_deg, b.lon_deg)).position_km
    return radius_km * central_angle(ua, ub)


def los_distance_km(h: float) -> float:
    """Longest unobstructed chord between two satellites at altitude ``h``."""
    if h < 0:
        raise ValueError(f"altitude must be >= 0, got {h}")
    return 2.0 * math.sqrt(h * h + 2.0 * h * EARTH_RADIUS_KM)


def sat_visible(r_i, r_j, h: float) -> bool:
    d = float(np.linalg.norm(np.asarray(r_i, dtype=np.float64) - np.asarray(r_j, dtype=np.float64)))
    return d <= los_distance_km(h)


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """Dense (n, n) Euclidean distance matrix."""
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
