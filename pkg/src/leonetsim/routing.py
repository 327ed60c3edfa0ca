"""Path computation, the edge2edge and conTest procedures, and path metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .geo import EARTH_RADIUS_KM, LIGHT_SPEED_KMS, central_angle
from .topology import TopologySnapshot

SHORTEST_PATH = "shortest_path"
LEAST_HOP = "least_hop"
_POLICY_WEIGHT = {SHORTEST_PATH: "distance_km", LEAST_HOP: "unit"}

STRETCH_FIBER_LIMIT = 1.5
DEFAULT_CONTEST_THRESHOLD = 1000


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class RoutingPolicy:
    algorithm: str = SHORTEST_PATH
    weight: str = ""

    def __post_init__(self):
        if self.algorithm not in _POLICY_WEIGHT:
            raise ValueError(f"unknown routing algorithm {self.algorithm!r}")
        expected = _POLICY_WEIGHT[self.algorithm]
        if not self.weight:
            object.__setattr__(self, "weight", expected)
        elif self.weight != expected:
            raise ValueError(f"{self.algorithm} requires weight {expected!r}, got {self.weight!r}")

    @classmethod
    def named(cls, name: str) -> "RoutingPolicy":
        return cls(name.replace("-", "_"))


@dataclass(frozen=True)
class PathRecord:
    t: float
    src: str
    dst: str
    nodes: tuple = ()
    prop_distance_km: float = 0.0
    latency_s: float = 0.0
    hops: int = 0
    found: bool = False

    @classmethod
    def not_found(cls, t: float, src: str, dst: str) -> "PathRecord":
        return cls(t, src, dst)


@dataclass
class InstanceSeries:
    meta: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    def sort(self):
        self.records.sort(key=lambda r: (r.t, r.src, r.dst))

    def for_pair(self, src: str, dst: str) -> list:
        return [r for r in self.records if r.src == src and r.dst == dst]

    def pairs(self) -> list:
        seen = {}
        for r in self.records:
            seen.setdefault((r.src, r.dst), None)
        return list(seen)


class Router:
    """Shortest-path queries on one snapshot, caching single-source distances.

    Station nodes are endpoints only: they are never expanded as relays
    unless ``transit_stations`` is set.
    """

    def __init__(self, snapshot: TopologySnapshot, policy: RoutingPolicy, transit_stations: bool = False):
        self.snapshot = snapshot
        self.policy = policy
        self.indptr, self.indices, self.weights, self.edge_ids = snapshot.csr(policy.weight)
        self.no_transit = None if transit_stations else snapshot.station_mask.astype(np.uint8)
        self._dist = {}

    def distances(self, source: int) -> np.ndarray:
        if source not in self._dist:
            self._dist[source] = kernels.dijkstra(self.indptr, self.indices, self.weights, source, self.no_transit)
        return self._dist[source]

    def _index(self, node_id: str) -> int:
        try:
            return self.snapshot.index[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def route(self, src: str, dst: str) -> PathRecord:
        s, d = self._index(src), self._index(dst)
        t = self.snapshot.t
        if s == d:
            return PathRecord(t, src, dst, (src,), 0.0, 0.0, 0, True)
        ds = self.distances(s)
        total = ds[d]
        if not math.isfinite(total):
            return PathRecord.not_found(t, src, dst)
        dt = self.distances(d)
        tol = 1e-12 * max(1.0, total)
        blocked = self.no_transit
        ip, ix, w = self.indptr, self.indices, self.weights
        # lexicographically smallest node sequence among minimum-cost paths:
        # depth-first over tight arcs in ascending neighbour order; the visited
        # set guards against zero-length links between co-located satellites
        def tight(u):
            out = []
            for k in range(ip[u], ip[u + 1]):
                v = int(ix[k])
                if v != d and blocked is not None and blocked[v]:
                    continue
                if abs(ds[u] + w[k] - ds[v]) <= tol and abs(ds[v] + dt[v] - total) <= tol:
                    out.append(v)
            return sorted(out)

        path = [s]
        seen = {s}
        stack = [iter(tight(s))]
        while path and path[-1] != d:
            nxt = next((v for v in stack[-1] if v not in seen), None)
            if nxt is None:
                stack.pop()
                path.pop()
                continue
            seen.add(nxt)
            path.append(nxt)
            stack.append(iter(tight(nxt)))
        if not path:
            raise RuntimeError(f"shortest-path walk stalled at {src}")
        return self._record(path)

    def _record(self, path: list) -> PathRecord:
        snap = self.snapshot
        lookup = snap.edge_lookup()
        dist = 0.0
        for a, b in zip(path, path[1:]):
            dist += float(snap.edge_distance[lookup[(a, b) if a < b else (b, a)]])
        nodes = tuple(snap.node_ids[i] for i in path)
        return PathRecord(snap.t, nodes[0], nodes[-1], nodes, dist, dist / LIGHT_SPEED_KMS, len(path) - 1, True)

    def path_edge_ids(self, record: PathRecord) -> list:
        lookup = self.snapshot.edge_lookup()
        idx = [self.snapshot.index[n] for n in record.nodes]
        return [lookup[(a, b) if a < b else (b, a)] for a, b in zip(idx, idx[1:])]


def route(snapshot: TopologySnapshot, src: str, dst: str, policy: RoutingPolicy | str = SHORTEST_PATH,
          transit_stations: bool = False) -> PathRecord:
    if isinstance(policy, str):
        policy = RoutingPolicy.named(policy)
    return Router(snapshot, policy, transit_stations).route(src, dst)


def edge2edge(scenario, station_pairs, policy: RoutingPolicy | str = SHORTEST_PATH, grid=None) -> InstanceSeries:
    """Route between edge stations at every grid timestamp.

    ``station_pairs`` is one ``(src, dst)`` pair or a list of them. A station
    that is out of coverage (or has no position) yields ``found=False``.
    """
    if isinstance(policy, str):
        policy = RoutingPolicy.named(policy)
    if station_pairs and isinstance(station_pairs[0], str):
        station_pairs = [tuple(station_pairs)]
    pairs = sorted({tuple(p) for p in station_pairs})
    endpoints = sorted({s for p in pairs for s in p})
    for sid in endpoints:
        if not scenario.has_station(sid):
            raise UnknownNode(sid)
    grid = grid or scenario.grid
    series = InstanceSeries(
        meta={
            "procedure": "edge2edge",
            "policy": policy.algorithm,
            "endpoints": [list(p) for p in pairs],
        }
    )
    for t in grid:
        snap = scenario.snapshot(t, station_ids=endpoints)
        router = Router(snap, policy)
        for src, dst in pairs:
            if src not in snap.index or dst not in snap.index:
                series.records.append(PathRecord.not_found(t, src, dst))
            else:
                series.records.append(router.route(src, dst))
    return series


def contest(scenario, policy: RoutingPolicy | str = SHORTEST_PATH, grid=None,
            threshold: int = DEFAULT_CONTEST_THRESHOLD) -> InstanceSeries:
    """Route satellite pairs in lexicographic order, ``threshold`` per timestamp."""
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if isinstance(policy, str):
        policy = RoutingPolicy.named(policy)
    grid = grid or scenario.grid
    series = InstanceSeries(meta={"procedure": "contest", "policy": policy.algorithm, "threshold": threshold})
    sat_ids = sorted(scenario.satellite_ids)
    for t in grid:
        snap = scenario.snapshot(t, station_ids=())
        router = Router(snap, policy)
        count = 0
        for src, dst in combinations(sat_ids, 2):
            if count >= threshold:
                break
            series.records.append(router.route(src, dst))
            count += 1
    return series


def geodesic_km(src_pos, dst_pos, radius_km: float) -> float:
    return radius_km * central_angle(src_pos, dst_pos)


def stretch(record: PathRecord, src_pos, dst_pos, mode: str = "ground") -> float:
    """Path length over the great-circle distance between the endpoints.

    ``mode="ground"`` measures the arc on the Earth's surface (station
    endpoints); ``mode="shell"`` uses the mean endpoint radius (satellites).
    """
    if not record.found:
        raise ValueError("stretch is undefined for a missing path")
    if record.src == record.dst:
        raise ValueError("stretch is undefined when src == dst")
    if mode == "ground":
        radius = EARTH_RADIUS_KM
    elif mode == "shell":
        radius = 0.5 * (float(np.linalg.norm(src_pos)) + float(np.linalg.norm(dst_pos)))
    else:
        raise ValueError(f"unknown stretch mode {mode!r}")
    geo = geodesic_km(src_pos, dst_pos, radius)
    if geo <= 0:
        raise ValueError("endpoints coincide; stretch undefined")
    return record.prop_distance_km / geo


def is_satellite(node_id: str) -> bool:
    return node_id.startswith("SAT")


def path_churn(records: Sequence[PathRecord]) -> list:
    """(t, change count) per record; ``None`` where no path was found."""
    out = []
    last = None
    for r in records:
        if not r.found:
            out.append((r.t, None))
            continue
        sats = {n for n in r.nodes if is_satellite(n)}
        out.append((r.t, 0 if last is None else len(sats ^ last)))
        last = sats
    return out


def reach(record: PathRecord, snapshot: TopologySnapshot) -> int:
    if not record.found or not record.nodes:
        return 0
    for u, v in zip(record.nodes, record.nodes[1:]):
        if not snapshot.has_edge(u, v):
            return 0
    return 1


def reachable_ratio(paths: Sequence[PathRecord], snapshot: TopologySnapshot, scale: float | None = None) -> float:
    """Sum of ``reach`` times ``scale``; the default scale 1/len(paths) gives the reachable fraction."""
    if not paths:
        raise ValueError("reachable_ratio needs at least one path")
    total = sum(reach(p, snapshot) for p in paths)
    return total * (1.0 / len(paths) if scale is None else scale)
