"""Runtime scenario: shells, stations and cached per-timestamp snapshots."""

from __future__ import annotations

from collections import OrderedDict
from importlib import resources

import numpy as np

from .constellation import OutOfAvailability, Shell, station_position
from .fileio.config import ScenarioConfig, config_digest, parse_config
from .geo import parse_epoch
from .topology import TopologySnapshot, assemble_snapshot, static_edges


class Scenario:
    def __init__(self, cfg: ScenarioConfig, cache_size: int = 256):
        self.cfg = cfg
        self.grid = cfg.grid
        self.epoch = parse_epoch(cfg.epoch)
        self.shells = [Shell(lay.walker, lay.isl, lay.eisl) for lay in cfg.layers]
        self.statics = [static_edges(sh) for sh in self.shells]
        self.ground_stations = {g.id: g for g in cfg.ground_stations}
        self.mobile_stations = {m.id: m for m in cfg.mobile_stations}
        self.coverage = cfg.coverage
        self.budget = cfg.link_budget
        self.digest = config_digest(cfg)
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size

    @property
    def name(self) -> str:
        return self.cfg.name

    @property
    def satellite_ids(self) -> list:
        return [nid for sh in self.shells for nid in sh.node_ids]

    @property
    def station_ids(self) -> list:
        return sorted(self.ground_stations) + sorted(self.mobile_stations)

    def has_station(self, sid: str) -> bool:
        return sid in self.ground_stations or sid in self.mobile_stations

    def snapshot(self, t: float, station_ids=None) -> TopologySnapshot:
        """Snapshot at ``t`` with the given stations attached (all when ``None``)."""
        if station_ids is None:
            station_ids = self.station_ids
        key = (float(t), tuple(sorted(station_ids)))
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key]
        gs = [self.ground_stations[s] for s in key[1] if s in self.ground_stations]
        ms = [self.mobile_stations[s] for s in key[1] if s in self.mobile_stations]
        unknown = [s for s in key[1] if not self.has_station(s)]
        if unknown:
            raise KeyError(unknown[0])
        snap = assemble_snapshot(t, self.shells, gs, ms, self.coverage, self.budget, self.statics)
        self._cache[key] = snap
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return snap

    def node_position(self, node_id: str, t: float):
        """Earth-fixed position of any node at ``t``; ``None`` if unavailable."""
        if node_id in self.ground_stations:
            return self.ground_stations[node_id].position_ecef()
        if node_id in self.mobile_stations:
            try:
                return station_position(self.mobile_stations[node_id], t).position_km
            except OutOfAvailability:
                return None
        for sh in self.shells:
            if node_id in sh.node_ids:
                return sh.positions_ecef(t)[sh.node_ids.index(node_id)]
        raise KeyError(node_id)

    def shell_of(self, node_id: str):
        for sh in self.shells:
            if node_id in sh.node_ids:
                return sh
        return None


def load_scenario(path) -> Scenario:
    """Load from a config.yaml file or a ``.sce`` folder containing one."""
    from pathlib import Path

    p = Path(path)
    if p.is_dir():
        p = p / "config.yaml"
    return Scenario(parse_config(p.read_text(encoding="utf-8")))


def template_text(name: str) -> str:
    """Text of a bundled config template (``table1``, ``density10``, ...)."""
    return resources.files("leonetsim").joinpath("data", f"{name}.yaml").read_text(encoding="utf-8")


def template(name: str) -> ScenarioConfig:
    return parse_config(template_text(name))
