"""config.yaml schema: parsing, validation and canonical serialisation."""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

import yaml

from ..constellation import (
    AIRCRAFT,
    THIRD_PARTY_SATELLITE,
    DEFAULT_THIRD_PARTY_ORBIT,
    GroundStation,
    MobileStation,
    OrbitSpec,
    WalkerConfig,
)
from ..geo import GeodeticPosition, TimeGrid, los_distance_km, parse_epoch
from ..linkbudget import LinkBudgetParams, db_to_ratio
from ..routing import DEFAULT_CONTEST_THRESHOLD, RoutingPolicy
from ..topology import CoverageConfig, EislConfig, IslPattern

GS_ID = re.compile(r"^GS-\d{4}$")
MS_ID = re.compile(r"^MS-\d{3}$")
LAYER_NAME = re.compile(r"^[A-Za-z0-9_]+$")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class LayerConfig:
    name: str
    walker: WalkerConfig
    isl: IslPattern = IslPattern()
    eisl: EislConfig = EislConfig()


@dataclass(frozen=True)
class DemandConfig:
    pairs: int = 100
    seed: int = 0
    capacity_aggregate: str = "mean"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    layers: tuple
    duration_s: float
    step_s: float
    epoch: str = "2024-01-01T00:00:00Z"
    ground_stations: tuple = ()
    mobile_stations: tuple = ()
    coverage: CoverageConfig = CoverageConfig()
    link_budget: LinkBudgetParams = LinkBudgetParams()
    routing: RoutingPolicy = RoutingPolicy()
    contest_threshold: int = DEFAULT_CONTEST_THRESHOLD
    demands: DemandConfig = DemandConfig()

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_duration(self.duration_s, self.step_s)


class _Reader:
    """Typed access to one mapping, tracking consumed keys for strictness."""

    def __init__(self, data, path: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen = set()

    def _key(self, key):
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return key in self.data

    def raw(self, key, required=True, default=None):
        self.seen.add(key)
        if key not in self.data:
            if required:
                raise ConfigError(self._key(key), "missing required key")
            return default
        return self.data[key]

    def number(self, key, required=True, default=None) -> float:
        v = self.raw(key, required, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(self._key(key), f"expected a number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError(self._key(key), "must be finite")
        return v

    def integer(self, key, required=True, default=None) -> int:
        v = self.raw(key, required, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._key(key), f"expected an integer, got {v!r}")
        return v

    def string(self, key, required=True, default=None) -> str:
        v = self.raw(key, required, default)
        if not isinstance(v, str):
            raise ConfigError(self._key(key), f"expected a string, got {v!r}")
        return v

    def sub(self, key, required=False) -> "_Reader":
        return _Reader(self.raw(key, required, {}), self._key(key))

    def items(self, key, required=False) -> list:
        v = self.raw(key, required, [])
        if v is None:
            v = []
        if not isinstance(v, list):
            raise ConfigError(self._key(key), "expected a list")
        return [(f"{self._key(key)}[{i}]", item) for i, item in enumerate(v)]

    def done(self):
        extra = sorted(set(self.data) - self.seen, key=str)
        if extra:
            raise ConfigError(self._key(extra[0]), "unknown key")


def _guard(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _one_of(r: _Reader, linear_key: str, db_key: str, default: float) -> float:
    if r.has(linear_key) and r.has(db_key):
        raise ConfigError(r._key(db_key), f"give either {linear_key} or {db_key}, not both")
    if r.has(db_key):
        return float(db_to_ratio(r.number(db_key)))
    return r.number(linear_key, required=False, default=default)


def _scaled(r: _Reader, base_key: str, alt_key: str, factor: float, default: float) -> float:
    if r.has(base_key) and r.has(alt_key):
        raise ConfigError(r._key(alt_key), f"give either {base_key} or {alt_key}, not both")
    if r.has(alt_key):
        return r.number(alt_key) * factor
    return r.number(base_key, required=False, default=default)


def _parse_isl(value, path) -> IslPattern:
    if isinstance(value, str):
        return _guard(path, IslPattern.parse, value)
    r = _Reader(value, path)
    fam = r.string("family", required=False, default="star_grid")
    var = r.integer("variant", required=False, default=1)
    r.done()
    return _guard(path, lambda: IslPattern(IslPattern.parse(fam).family, var))


def _parse_layer(path, data, index) -> LayerConfig:
    r = _Reader(data, path)
    name = r.string("name", required=False, default=f"layer{index}")
    if not LAYER_NAME.match(name):
        raise ConfigError(f"{path}.name", "layer names may only use letters, digits and '_'")
    w = r.sub("walker", required=True)
    walker = _guard(
        w.path,
        WalkerConfig,
        name=name,
        total_sats=w.integer("total"),
        planes=w.integer("planes"),
        phasing=w.integer("phasing", required=False, default=0),
        inclination_deg=w.number("inclination_deg"),
        altitude_km=w.number("altitude_km"),
        layer=index,
    )
    w.done()
    isl = _parse_isl(r.raw("isl", required=False, default="*Grid 1"), f"{path}.isl")
    e = r.sub("eisl")
    eisl = _guard(
        e.path,
        EislConfig,
        range_km=e.number("range_km", required=False, default=2000.0),
        ports_per_sat=e.integer("ports", required=False, default=1),
    )
    e.done()
    if eisl.range_km > los_distance_km(walker.altitude_km):
        raise ConfigError(
            f"{path}.eisl.range_km",
            f"association range {eisl.range_km} km exceeds line of sight {los_distance_km(walker.altitude_km):.3f} km",
        )
    r.done()
    if walker.planes < 3 or walker.sats_per_plane < 3:
        raise ConfigError(f"{path}.walker", "grid ISLs need at least 3 planes and 3 satellites per plane")
    return LayerConfig(name, walker, isl, eisl)


def _parse_geodetic(r: _Reader, path: str, alt_default=0.0) -> GeodeticPosition:
    return _guard(
        path,
        GeodeticPosition,
        r.number("lat_deg"),
        r.number("lon_deg"),
        r.number("alt_km", required=False, default=alt_default),
    )


def _parse_mobile(path, data) -> MobileStation:
    r = _Reader(data, path)
    sid = r.string("id")
    if not MS_ID.match(sid):
        raise ConfigError(f"{path}.id", f"mobile station ids look like MS-nnn, got {sid!r}")
    kind = r.string("kind")
    if kind == AIRCRAFT:
        wps = []
        for wpath, wdata in r.items("waypoints", required=True):
            wr = _Reader(wdata, wpath)
            t = wr.number("t_s")
            wps.append((t, _parse_geodetic(wr, wpath, alt_default=10.0)))
            wr.done()
        r.done()
        return _guard(path, MobileStation, sid, AIRCRAFT, tuple(wps))
    if kind == THIRD_PARTY_SATELLITE:
        o = r.sub("orbit")
        d = DEFAULT_THIRD_PARTY_ORBIT
        orbit = _guard(
            o.path,
            OrbitSpec,
            o.number("altitude_km", required=False, default=d.altitude_km),
            o.number("inclination_deg", required=False, default=d.inclination_deg),
            o.number("raan_deg", required=False, default=d.raan_deg),
            o.number("phase_deg", required=False, default=d.phase_deg),
        )
        o.done()
        r.done()
        return MobileStation(sid, THIRD_PARTY_SATELLITE, (), orbit)
    raise ConfigError(f"{path}.kind", f"expected 'aircraft' or 'third_party_satellite', got {kind!r}")


def config_from_dict(doc) -> ScenarioConfig:
    r = _Reader(doc, "")
    name = r.string("name")
    if not name or "/" in name or name.startswith("."):
        raise ConfigError("name", f"not usable as a folder name: {name!r}")
    layer_items = r.items("layers", required=True)
    if not layer_items:
        raise ConfigError("layers", "at least one layer is required")
    layers = tuple(_parse_layer(p, d, i) for i, (p, d) in enumerate(layer_items))
    if len({lay.name for lay in layers}) != len(layers):
        raise ConfigError("layers", "layer names must be unique")

    sim = r.sub("simulation", required=True)
    duration = sim.number("duration_s")
    step = sim.number("step_s")
    sim.done()
    if not step > 0:
        raise ConfigError("simulation.step_s", "must be positive")
    if duration < step:
        raise ConfigError("simulation.duration_s", "must cover at least one step")

    epoch = r.string("epoch", required=False, default=ScenarioConfig.epoch)
    _guard("epoch", parse_epoch, epoch)

    stations = []
    for p, d in r.items("ground_stations"):
        sr = _Reader(d, p)
        sid = sr.string("id")
        if not GS_ID.match(sid):
            raise ConfigError(f"{p}.id", f"ground station ids look like GS-nnnn, got {sid!r}")
        loc = _guard(p, GeodeticPosition, sr.number("lat_deg"), sr.number("lon_deg"), 0.0)
        stations.append(GroundStation(sid, sr.string("name", required=False, default=sid), loc))
        sr.done()
    mobiles = [_parse_mobile(p, d) for p, d in r.items("mobile_stations")]
    ids = [s.id for s in stations] + [m.id for m in mobiles]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})[0]
        raise ConfigError("ground_stations", f"duplicate station id {dup}")

    c = r.sub("coverage")
    coverage = _guard(c.path, CoverageConfig, c.number("steering_angle_deg", required=False, default=45.0))
    c.done()

    lb = r.sub("link_budget")
    d = LinkBudgetParams()
    budget = _guard(
        lb.path,
        LinkBudgetParams,
        eirp_w=_one_of(lb, "eirp_w", "eirp_dbw", d.eirp_w),
        rx_gain=_one_of(lb, "rx_gain", "rx_gain_dbi", d.rx_gain),
        noise_temp_k=lb.number("noise_temp_k", required=False, default=d.noise_temp_k),
        bandwidth_hz=_scaled(lb, "bandwidth_hz", "bandwidth_mhz", 1e6, d.bandwidth_hz),
        carrier_hz=_scaled(lb, "carrier_hz", "carrier_ghz", 1e9, d.carrier_hz),
    )
    lb.done()

    rt = r.sub("routing")
    policy = _guard(rt.path, RoutingPolicy.named, rt.string("policy", required=False, default="shortest_path"))
    threshold = rt.integer("contest_threshold", required=False, default=DEFAULT_CONTEST_THRESHOLD)
    if threshold <= 0:
        raise ConfigError("routing.contest_threshold", "must be positive")
    rt.done()

    dm = r.sub("demands")
    demands = DemandConfig(
        dm.integer("pairs", required=False, default=100),
        dm.integer("seed", required=False, default=0),
        dm.string("capacity_aggregate", required=False, default="mean"),
    )
    if demands.pairs < 0:
        raise ConfigError("demands.pairs", "must be >= 0")
    if demands.capacity_aggregate not in ("mean", "sum"):
        raise ConfigError("demands.capacity_aggregate", "expected 'mean' or 'sum'")
    dm.done()
    r.done()

    return ScenarioConfig(
        name=name,
        layers=layers,
        duration_s=duration,
        step_s=step,
        epoch=epoch,
        ground_stations=tuple(stations),
        mobile_stations=tuple(mobiles),
        coverage=coverage,
        link_budget=budget,
        routing=policy,
        contest_threshold=threshold,
        demands=demands,
    )


def parse_config(text: str) -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"malformed YAML: {exc}") from None
    return config_from_dict(doc)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical, fully explicit mapping (linear link-budget units)."""
    def geo(p: GeodeticPosition, with_alt=True):
        out = {"lat_deg": p.lat_deg, "lon_deg": p.lon_deg}
        if with_alt:
            out["alt_km"] = p.alt_km
        return out

    mobiles = []
    for m in cfg.mobile_stations:
        if m.kind == AIRCRAFT:
            mobiles.append(
                {"id": m.id, "kind": m.kind, "waypoints": [{"t_s": t, **geo(p)} for t, p in m.waypoints]}
            )
        else:
            o = m.orbit
            mobiles.append(
                {
                    "id": m.id,
                    "kind": m.kind,
                    "orbit": {
                        "altitude_km": o.altitude_km,
                        "inclination_deg": o.inclination_deg,
                        "raan_deg": o.raan_deg,
                        "phase_deg": o.phase_deg,
                    },
                }
            )
    lb = cfg.link_budget
    return {
        "name": cfg.name,
        "epoch": cfg.epoch,
        "simulation": {"duration_s": cfg.duration_s, "step_s": cfg.step_s},
        "layers": [
            {
                "name": lay.name,
                "walker": {
                    "total": lay.walker.total_sats,
                    "planes": lay.walker.planes,
                    "phasing": lay.walker.phasing,
                    "inclination_deg": lay.walker.inclination_deg,
                    "altitude_km": lay.walker.altitude_km,
                },
                "isl": {"family": lay.isl.family, "variant": lay.isl.variant},
                "eisl": {"range_km": lay.eisl.range_km, "ports": lay.eisl.ports_per_sat},
            }
            for lay in cfg.layers
        ],
        "coverage": {"steering_angle_deg": cfg.coverage.steering_angle_deg},
        "link_budget": {
            "eirp_w": lb.eirp_w,
            "rx_gain": lb.rx_gain,
            "noise_temp_k": lb.noise_temp_k,
            "bandwidth_hz": lb.bandwidth_hz,
            "carrier_hz": lb.carrier_hz,
        },
        "routing": {"policy": cfg.routing.algorithm, "contest_threshold": cfg.contest_threshold},
        "demands": {
            "pairs": cfg.demands.pairs,
            "seed": cfg.demands.seed,
            "capacity_aggregate": cfg.demands.capacity_aggregate,
        },
        "ground_stations": [{"id": g.id, "name": g.name, **geo(g.location, with_alt=False)} for g in cfg.ground_stations],
        "mobile_stations": mobiles,
    }


def serialize_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False, allow_unicode=True)


def config_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
