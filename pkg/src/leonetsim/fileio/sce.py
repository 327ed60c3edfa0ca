"""``.sce`` scenario folder emission."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from ..constellation import OutOfAvailability, export_tle, station_position
from ..topology import EISL, GSL, MSL
from .config import ScenarioConfig, serialize_config
from .czml import fixed_position_packet, link_packet, sampled_position_packet, write_czml

LAYER_FILES = (
    "{layer}_sats.czml",
    "{layer}_isls.czml",
    "{layer}_eisl.czml",
    "{layer}_gsls.czml",
    "{layer}_msls.czml",
    "{layer}_tle.txt",
    "{layer}_eisl.json",
    "{layer}_isls.json",
    "{layer}_gsls.json",
    "{layer}_msls.json",
)
SHARED_FILES = ("config.yaml", "gses.czml", "mses.czml")


@dataclass(frozen=True)
class SceFolder:
    path: Path
    files: tuple


def expected_files(cfg: ScenarioConfig) -> list:
    names = list(SHARED_FILES)
    for lay in cfg.layers:
        names.extend(f.format(layer=lay.name) for f in LAYER_FILES)
    return sorted(names)


def active_runs(times, flags) -> list:
    """Inclusive (start, end) runs of consecutive timestamps whose flag is set."""
    runs = []
    start = prev = None
    for t, on in zip(times, flags):
        if on:
            if start is None:
                start = t
            prev = t
        elif start is not None:
            runs.append((start, prev))
            start = None
    if start is not None:
        runs.append((start, prev))
    return runs


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _timeline(times, per_t_sets) -> list:
    """Merge consecutive timestamps with identical edge sets into interval entries."""
    entries = []
    for t, edges in zip(times, per_t_sets):
        pairs = sorted(edges)
        if entries and entries[-1]["edges"] == [list(p) for p in pairs]:
            entries[-1]["interval"][1] = t
        else:
            entries.append({"interval": [t, t], "edges": [list(p) for p in pairs]})
    return entries


def generate_sce(cfg: ScenarioConfig, out_dir, scenario=None) -> SceFolder:
    """Write ``<out_dir>/<name>.sce/`` with every entity and link file.

    Build order follows entity dependencies: satellites, then grid ISLs, then
    encounter ISLs; mobile stations before MSLs; ground stations before GSLs.
    """
    from ..scenario import Scenario

    sc = scenario or Scenario(cfg)
    folder = Path(out_dir) / f"{cfg.name}.sce"
    folder.mkdir(parents=True, exist_ok=True)
    epoch = sc.epoch
    times = list(sc.grid)
    span = [(times[0], times[-1])]

    _write(folder / "config.yaml", serialize_config(cfg))

    # one pass over the timeline; snapshot edges are bucketed by layer and kind
    layer_of = {}
    for sh in sc.shells:
        for nid in sh.node_ids:
            layer_of[nid] = sh.cfg.name
    dynamic = {(sh.cfg.name, k): [] for sh in sc.shells for k in (EISL, GSL, MSL)}
    sat_positions = {sh.cfg.name: [] for sh in sc.shells}
    for t in times:
        snap = sc.snapshot(t)
        bucket = defaultdict(set)
        for e in snap.edges:
            if e.kind in (EISL, GSL, MSL):
                sat = e.endpoint_b if e.endpoint_b in layer_of else e.endpoint_a
                bucket[(layer_of[sat], e.kind)].add((e.endpoint_a, e.endpoint_b))
        for key in dynamic:
            dynamic[key].append(bucket.get(key, set()))
        for sh in sc.shells:
            sat_positions[sh.cfg.name].append(sh.positions_ecef(t))

    def write_dynamic(kind, stem, label):
        for sh in sc.shells:
            name = sh.cfg.name
            per_t = dynamic[(name, kind)]
            all_edges = sorted(set().union(*per_t)) if per_t else []
            packets = [
                link_packet(f"{label}/{a}/{b}", a, b, epoch, active_runs(times, [(a, b) in s for s in per_t]))
                for a, b in all_edges
            ]
            _write(folder / f"{name}_{stem}.czml", write_czml(packets, cfg.name))
            _write(
                folder / f"{name}_{stem}.json",
                _json({"layer": name, "class": stem, "epoch": cfg.epoch, "entries": _timeline(times, per_t)}),
            )

    # SAT -> ISL -> eISL
    for sh, mm in zip(sc.shells, sc.statics):
        name = sh.cfg.name
        ids = sh.node_ids
        packets = [
            sampled_position_packet(nid, epoch, times, [p[k] for p in sat_positions[name]], intervals=span)
            for k, nid in enumerate(ids)
        ]
        _write(folder / f"{name}_sats.czml", write_czml(packets, cfg.name))
        _write(folder / f"{name}_tle.txt", export_tle(sh.sats, epoch))
        intra = sorted((ids[a], ids[b]) for a, b in mm.m_static_intra)
        inter = sorted((ids[a], ids[b]) for a, b in mm.m_static_inter)
        packets = [link_packet(f"ISL/{a}/{b}", a, b, epoch, span) for a, b in sorted(intra + inter)]
        _write(folder / f"{name}_isls.czml", write_czml(packets, cfg.name))
        _write(
            folder / f"{name}_isls.json",
            _json({"layer": name, "class": "isls", "intra": [list(p) for p in intra], "inter": [list(p) for p in inter]}),
        )
    write_dynamic(EISL, "eisl", "EISL")

    # MSes -> MSL
    packets = []
    for ms in cfg.mobile_stations:
        ts, ps = [], []
        for t in times:
            try:
                ps.append(station_position(ms, t).position_km)
            except OutOfAvailability:
                continue
            ts.append(t)
        if ts:
            present = set(ts)
            pk = sampled_position_packet(ms.id, epoch, ts, ps, intervals=active_runs(times, [t in present for t in times]))
            pk["description"] = ms.kind
            packets.append(pk)
    _write(folder / "mses.czml", write_czml(packets, cfg.name))
    write_dynamic(MSL, "msls", "MSL")

    # GSes -> GSL
    packets = [fixed_position_packet(g.id, g.position_ecef(), g.name) for g in cfg.ground_stations]
    _write(folder / "gses.czml", write_czml(packets, cfg.name))
    write_dynamic(GSL, "gsls", "GSL")

    return SceFolder(folder, tuple(sorted(p.name for p in folder.iterdir())))
