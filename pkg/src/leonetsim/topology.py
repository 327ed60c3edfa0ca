"""Time-varying link graph: grid ISLs, encounter ISLs, ground and mobile links."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .constellation import (
    GroundStation,
    MobileStation,
    OutOfAvailability,
    SatelliteId,
    Shell,
    WalkerConfig,
    station_position,
)
from .geo import EARTH_RADIUS_KM, TimeGrid, los_distance_km, pairwise_distances

PLUS_GRID = "plus_grid"
STAR_GRID = "star_grid"

INTRA_ISL = "intra_isl"
INTER_ISL = "inter_isl"
EISL = "eisl"
GSL = "gsl"
MSL = "msl"
EDGE_KINDS = (INTRA_ISL, INTER_ISL, EISL, GSL, MSL)
_KIND_CODE = {k: i for i, k in enumerate(EDGE_KINDS)}

_PATTERN_ALIASES = {
    "plus_grid": PLUS_GRID,
    "+grid": PLUS_GRID,
    "plus": PLUS_GRID,
    "star_grid": STAR_GRID,
    "*grid": STAR_GRID,
    "star": STAR_GRID,
}


@dataclass(frozen=True)
class IslPattern:
    family: str = STAR_GRID
    variant: int = 1

    def __post_init__(self):
        if self.family not in (PLUS_GRID, STAR_GRID):
            raise ValueError(f"unknown ISL pattern family {self.family!r}")
        if self.variant not in (1, 2):
            raise ValueError(f"ISL pattern variant must be 1 or 2, got {self.variant}")

    @property
    def degree(self) -> int:
        return 4 if self.family == PLUS_GRID else 6

    @property
    def label(self) -> str:
        return f"{'+' if self.family == PLUS_GRID else '*'}Grid {self.variant}"

    @classmethod
    def parse(cls, text: str) -> "IslPattern":
        """Accepts ``"*Grid 1"``, ``"+Grid"``, ``"star_grid:2"`` and similar."""
        raw = text.strip().lower().replace(":", " ")
        parts = raw.split()
        if not parts or parts[0] not in _PATTERN_ALIASES:
            raise ValueError(f"unrecognised ISL pattern {text!r}")
        variant = int(parts[1]) if len(parts) > 1 else 1
        return cls(_PATTERN_ALIASES[parts[0]], variant)


@dataclass(frozen=True)
class Edge:
    endpoint_a: str
    endpoint_b: str
    kind: str
    distance_km: float
    capacity_bps: float


@dataclass
class MatchingMatrices:
    """Edge sets keyed by flat satellite index pairs ``(a, b)`` with ``a < b``."""

    m_static_intra: set = field(default_factory=set)
    m_static_inter: set = field(default_factory=set)
    m_eisl_t: dict = field(default_factory=dict)

    @property
    def static(self) -> set:
        return self.m_static_intra | self.m_static_inter

    def at(self, t: float) -> set:
        return self.static | self.m_eisl_t.get(t, set())


@dataclass(frozen=True)
class EislConfig:
    range_km: float = 2000.0
    ports_per_sat: int = 1

    def __post_init__(self):
        if self.range_km < 0:
            raise ValueError(f"eISL range must be >= 0, got {self.range_km}")
        if self.ports_per_sat < 1:
            raise ValueError(f"ports_per_sat must be positive, got {self.ports_per_sat}")

    def check_against(self, altitude_km: float):
        los = los_distance_km(altitude_km)
        if self.range_km > los:
            raise ValueError(f"eISL range {self.range_km} km exceeds line of sight {los:.3f} km")


@dataclass(frozen=True)
class CoverageConfig:
    steering_angle_deg: float = 45.0

    def __post_init__(self):
        if not 0 < self.steering_angle_deg < 90:
            raise ValueError(f"steering angle must be in (0, 90), got {self.steering_angle_deg}")


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def build_grid_isls(cfg: WalkerConfig, pattern: IslPattern) -> MatchingMatrices:
    """Static intra-plane (M-) and inter-plane (M+) link sets.

    +Grid 2 aims each inter-plane link at the neighbour-plane satellite whose
    epoch argument of latitude is closest, which only differs from +Grid 1
    when the phasing factor is non-zero (notably across the seam). *Grid
    adds one diagonal per satellite: (p+1, f+1) for variant 1 and
    (p+1, f-1) for variant 2.
    """
    P, n = cfg.planes, cfg.sats_per_plane
    if P < 3 or n < 3:
        raise ValueError(f"grid ISLs need P >= 3 and N_P >= 3 (got P={P}, N_P={n})")

    def flat(p, f):
        return (p % P) * n + (f % n)

    intra, inter = set(), set()
    for p in range(P):
        if pattern.family == PLUS_GRID and pattern.variant == 2:
            if p < P - 1:
                shift = -_round_half_up(cfg.phasing / P)
            else:
                shift = _round_half_up((P - 1) * cfg.phasing / P)
        else:
            shift = 0
        for f in range(n):
            intra.add(_pair(flat(p, f), flat(p, f + 1)))
            inter.add(_pair(flat(p, f), flat(p + 1, f + shift)))
            if pattern.family == STAR_GRID:
                diag = 1 if pattern.variant == 1 else -1
                inter.add(_pair(flat(p, f), flat(p + 1, f + diag)))
    return MatchingMatrices(intra, inter)


def _min_ring_diff(a, b, size):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return np.where(d <= size / 2, d, np.minimum(a, b) + size - np.maximum(a, b))


def plane_diff(s_i: SatelliteId, s_j: SatelliteId, planes: int) -> int:
    return int(_min_ring_diff(s_i.plane, s_j.plane, planes))


def phase_diff(s_i: SatelliteId, s_j: SatelliteId, sats_per_plane: int) -> int:
    return int(_min_ring_diff(s_i.phase, s_j.phase, sats_per_plane))


def hop_formula(dp, df, family: str):
    """Closed-form grid distance from plane and phase differences."""
    dp = np.asarray(dp)
    df = np.asarray(df)
    if family == PLUS_GRID:
        return dp + df
    return np.minimum(dp, df) + np.abs(dp - df)


def topo_distance(s_i: SatelliteId, s_j: SatelliteId, pattern: IslPattern, planes: int, sats_per_plane: int) -> int:
    dp = plane_diff(s_i, s_j, planes)
    df = phase_diff(s_i, s_j, sats_per_plane)
    return int(hop_formula(dp, df, pattern.family))


def match_eisls(
    positions: np.ndarray,
    visible: np.ndarray,
    static: set,
    cfg: EislConfig,
    pattern: IslPattern,
    walker: WalkerConfig,
    distances: np.ndarray | None = None,
) -> set:
    """Greedy encounter-link matching for one layer at one timestamp.

    Candidates are visible, non-adjacent pairs within the association range.
    They are taken in order of descending grid distance, then ascending
    length, then ascending index pair, while both ends have a free port.
    """
    if cfg.range_km <= 0:
        return set()
    d = pairwise_distances(positions) if distances is None else distances
    n = len(positions)
    ii, jj = np.triu_indices(n, k=1)
    dij = d[ii, jj]
    ok = visible[ii, jj] & (dij <= cfg.range_km)
    ii, jj, dij = ii[ok], jj[ok], dij[ok]
    if static:
        adjacent = np.array([(a, b) in static for a, b in zip(ii.tolist(), jj.tolist())], dtype=bool)
        keep = ~adjacent
        ii, jj, dij = ii[keep], jj[keep], dij[keep]
    if len(ii) == 0:
        return set()
    n_p = walker.sats_per_plane
    g = hop_formula(
        _min_ring_diff(ii // n_p, jj // n_p, walker.planes),
        _min_ring_diff(ii % n_p, jj % n_p, n_p),
        pattern.family,
    )
    order = np.lexsort((jj, ii, dij, -g))
    used = np.zeros(n, dtype=np.int64)
    cap = cfg.ports_per_sat
    out = set()
    for k in order.tolist():
        a, b = int(ii[k]), int(jj[k])
        if used[a] < cap and used[b] < cap:
            used[a] += 1
            used[b] += 1
            out.add((a, b))
    return out


def association_duration(
    s_i: int,
    s_j: int,
    d_delta: float,
    grid: TimeGrid,
    positions_by_t: Callable[[float], np.ndarray] | Sequence[np.ndarray],
) -> list[tuple[float, float]]:
    """Inclusive [t_start, t_end] runs of grid timestamps with d(s_i, s_j) <= d_delta."""
    intervals = []
    start = prev = None
    for k, t in enumerate(grid):
        pos = positions_by_t(t) if callable(positions_by_t) else positions_by_t[k]
        inside = float(np.linalg.norm(pos[s_i] - pos[s_j])) <= d_delta
        if inside:
            if start is None:
                start = t
            prev = t
        elif start is not None:
            intervals.append((start, prev))
            start = None
    if start is not None:
        intervals.append((start, prev))
    return intervals


def coverage_mask(sat_positions: np.ndarray, station_pos: np.ndarray, alpha_deg: float) -> np.ndarray:
    """Vectorised ``coverage_test`` of one station against many satellites."""
    sats = np.atleast_2d(np.asarray(sat_positions, dtype=np.float64))
    st = np.asarray(station_pos, dtype=np.float64)
    seg = st[None, :] - sats
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    nadir = -sats
    cross = np.cross(nadir, seg)
    angle = np.arctan2(np.linalg.norm(cross, axis=1), np.einsum("ij,ij->i", nadir, seg))
    in_beam = angle <= math.radians(alpha_deg)
    # closest approach of the satellite->station segment to Earth's centre
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(-np.einsum("ij,ij->i", sats, seg) / seg_len2, 0.0, 1.0)
    closest = sats + s[:, None] * seg
    closest_r = np.linalg.norm(closest, axis=1)
    blocked = (s < 1.0 - 1e-12) & (closest_r < EARTH_RADIUS_KM * (1.0 - 1e-12))
    coincident = seg_len2 == 0.0
    return np.where(coincident, True, in_beam & ~blocked)


def coverage_test(sat_pos, station_pos, alpha_deg: float) -> bool:
    return bool(coverage_mask(np.asarray(sat_pos)[None, :], station_pos, alpha_deg)[0])


@dataclass
class TopologySnapshot:
    """Graph at one timestamp. Node indices follow sorted node ids."""

    t: float
    node_ids: list
    positions: np.ndarray
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_kind: np.ndarray
    edge_distance: np.ndarray
    edge_capacity: np.ndarray
    station_mask: np.ndarray
    _csr_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {nid: i for i, nid in enumerate(self.node_ids)}

    @property
    def num_edges(self) -> int:
        return len(self.edge_a)

    @property
    def edges(self) -> list[Edge]:
        ids = self.node_ids
        return [
            Edge(ids[a], ids[b], EDGE_KINDS[k], float(d), float(c))
            for a, b, k, d, c in zip(
                self.edge_a.tolist(),
                self.edge_b.tolist(),
                self.edge_kind.tolist(),
                self.edge_distance.tolist(),
                self.edge_capacity.tolist(),
            )
        ]

    def edges_of_kind(self, kind: str) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]

    def position(self, node_id: str) -> np.ndarray:
        return self.positions[self.index[node_id]]

    def edge_lookup(self) -> dict:
        key = "lookup"
        if key not in self._csr_cache:
            self._csr_cache[key] = {
                (a, b): k for k, (a, b) in enumerate(zip(self.edge_a.tolist(), self.edge_b.tolist()))
            }
        return self._csr_cache[key]

    def has_edge(self, u: str, v: str) -> bool:
        a, b = self.index.get(u), self.index.get(v)
        if a is None or b is None:
            return False
        return _pair(a, b) in self.edge_lookup()

    def csr(self, weight: str = "distance_km", edge_mask: np.ndarray | None = None):
        """(indptr, indices, weights, edge_ids) adjacency with both arc directions."""
        cacheable = edge_mask is None
        if cacheable and weight in self._csr_cache:
            return self._csr_cache[weight]
        keep = np.arange(self.num_edges) if edge_mask is None else np.flatnonzero(edge_mask)
        a = self.edge_a[keep]
        b = self.edge_b[keep]
        if weight == "distance_km":
            w = self.edge_distance[keep]
        elif weight == "unit":
            w = np.ones(len(keep))
        else:
            raise ValueError(f"unknown edge weight {weight!r}")
        tails = np.concatenate([a, b])
        heads = np.concatenate([b, a])
        ws = np.concatenate([w, w])
        eids = np.concatenate([keep, keep])
        order = np.lexsort((heads, tails))
        tails, heads, ws, eids = tails[order], heads[order], ws[order], eids[order]
        indptr = np.zeros(len(self.node_ids) + 1, dtype=np.int64)
        np.add.at(indptr, tails + 1, 1)
        indptr = np.cumsum(indptr)
        out = (indptr, heads.astype(np.int64), ws.astype(np.float64), eids)
        if cacheable:
            self._csr_cache[weight] = out
        return out

    def without_edges(self, edge_ids: Iterable[int]) -> "TopologySnapshot":
        keep = np.ones(self.num_edges, dtype=bool)
        keep[list(edge_ids)] = False
        return TopologySnapshot(
            self.t,
            self.node_ids,
            self.positions,
            self.edge_a[keep],
            self.edge_b[keep],
            self.edge_kind[keep],
            self.edge_distance[keep],
            self.edge_capacity[keep],
            self.station_mask,
        )


def snapshot_from_edges(node_ids, edges, t: float = 0.0, positions=None, station_ids=()) -> TopologySnapshot:
    """Snapshot from explicit ``(u, v, distance_km[, capacity_bps[, kind]])`` edges.

    Used for hand-built and random graphs; positions default to zeros.
    """
    ids = sorted(node_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node ids")
    index = {nid: i for i, nid in enumerate(ids)}
    if positions is None:
        pos = np.zeros((len(ids), 3))
    else:
        pos = np.array([positions[nid] for nid in ids], dtype=np.float64).reshape(-1, 3)
    rows = {}
    for e in edges:
        u, v, d = e[0], e[1], float(e[2])
        cap = float(e[3]) if len(e) > 3 else 0.0
        kind = e[4] if len(e) > 4 else INTRA_ISL
        if u == v:
            raise ValueError(f"self-loop on {u}")
        if not d > 0:
            raise ValueError(f"edge {u}-{v} must have positive length")
        key = _pair(index[u], index[v])
        if key in rows:
            raise ValueError(f"duplicate edge {u}-{v}")
        rows[key] = (_KIND_CODE[kind], d, cap)
    keys = sorted(rows)
    stations = set(station_ids)
    return TopologySnapshot(
        t,
        ids,
        pos,
        np.array([a for a, _ in keys], dtype=np.int64),
        np.array([b for _, b in keys], dtype=np.int64),
        np.array([rows[k][0] for k in keys], dtype=np.int64),
        np.array([rows[k][1] for k in keys], dtype=np.float64),
        np.array([rows[k][2] for k in keys], dtype=np.float64),
        np.array([nid in stations for nid in ids], dtype=bool),
    )


def static_edges(shell: Shell) -> MatchingMatrices:
    return build_grid_isls(shell.cfg, shell.isl_pattern)


def assemble_snapshot(
    t: float,
    shells: Sequence[Shell],
    stations: Sequence[GroundStation] = (),
    mobiles: Sequence[MobileStation] = (),
    coverage: CoverageConfig | None = None,
    budget=None,
    statics: Sequence[MatchingMatrices] | None = None,
) -> TopologySnapshot:
    """Full edge set at ``t``: grid ISLs, matched eISLs, GSLs and MSLs.

    Mobile stations without a position at ``t`` are left out of the graph.
    Every edge carries its Euclidean length and, when ``budget`` is given,
    its Shannon capacity (otherwise capacity 0).
    """
    from .linkbudget import link_capacity

    coverage = coverage or CoverageConfig()
    if statics is None:
        statics = [static_edges(sh) for sh in shells]

    sat_ids, sat_pos, offsets = [], [], []
    for sh in shells:
        offsets.append(len(sat_ids))
        sat_ids.extend(sh.node_ids)
        sat_pos.append(sh.positions_ecef(t))
    sat_pos = np.vstack(sat_pos) if sat_pos else np.zeros((0, 3))

    st_ids, st_pos, st_kind = [], [], []
    for gs in stations:
        st_ids.append(gs.id)
        st_pos.append(gs.position_ecef())
        st_kind.append(GSL)
    for ms in mobiles:
        try:
            p = station_position(ms, t).position_km
        except OutOfAvailability:
            continue
        st_ids.append(ms.id)
        st_pos.append(p)
        st_kind.append(MSL)

    # sat nodes sort after GS-/MS- ids; stations sorted among themselves
    st_order = sorted(range(len(st_ids)), key=lambda i: st_ids[i])
    st_ids = [st_ids[i] for i in st_order]
    st_pos = [st_pos[i] for i in st_order]
    st_kind = [st_kind[i] for i in st_order]
    node_ids = st_ids + sat_ids
    if node_ids != sorted(node_ids):
        raise ValueError("station ids must sort before satellite ids (GS-/MS- prefixes)")
    n_st = len(st_ids)
    positions = np.vstack([np.asarray(st_pos).reshape(-1, 3), sat_pos])

    ea, eb, ek = [], [], []
    for sh, off, mm in zip(shells, offsets, statics):
        for kind, edge_set in ((INTRA_ISL, mm.m_static_intra), (INTER_ISL, mm.m_static_inter)):
            for a, b in edge_set:
                ea.append(n_st + off + a)
                eb.append(n_st + off + b)
                ek.append(_KIND_CODE[kind])
        if sh.eisl is not None and sh.eisl.range_km > 0:
            pos = sat_pos[off : off + len(sh)]
            d = pairwise_distances(pos)
            visible = d <= los_distance_km(sh.cfg.altitude_km)
            for a, b in match_eisls(pos, visible, mm.static, sh.eisl, sh.isl_pattern, sh.cfg, distances=d):
                ea.append(n_st + off + a)
                eb.append(n_st + off + b)
                ek.append(_KIND_CODE[EISL])
    for k in range(n_st):
        cov = coverage_mask(sat_pos, st_pos[k], coverage.steering_angle_deg)
        for s in np.flatnonzero(cov).tolist():
            ea.append(k)
            eb.append(n_st + s)
            ek.append(_KIND_CODE[st_kind[k]])

    ea = np.asarray(ea, dtype=np.int64)
    eb = np.asarray(eb, dtype=np.int64)
    ek = np.asarray(ek, dtype=np.int64)
    order = np.lexsort((eb, ea))
    ea, eb, ek = ea[order], eb[order], ek[order]
    dist = np.linalg.norm(positions[ea] - positions[eb], axis=1) if len(ea) else np.zeros(0)
    # co-located satellites (F = 0 shells) give zero-length links; floor at 1 m
    caps = link_capacity(budget, np.maximum(dist, 1e-3)) if budget is not None and len(dist) else np.zeros(len(dist))
    station_mask = np.zeros(len(node_ids), dtype=bool)
    station_mask[:n_st] = True
    return TopologySnapshot(t, node_ids, positions, ea, eb, ek, dist, np.asarray(caps, dtype=np.float64), station_mask)
