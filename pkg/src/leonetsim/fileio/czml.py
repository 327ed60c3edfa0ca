"""Minimal CZML writer: document packet, sampled positions, polylines, availability."""

from __future__ import annotations

import json
from datetime import datetime
from typing import Iterable, Sequence

from ..geo import iso_at

DOCUMENT_ID = "document"


def document_packet(name: str) -> dict:
    return {"id": DOCUMENT_ID, "name": name, "version": "1.0"}


def availability(epoch: datetime, intervals: Sequence[tuple[float, float]]):
    """One ``start/end`` string, or a list of them for several intervals."""
    spans = [f"{iso_at(epoch, a)}/{iso_at(epoch, b)}" for a, b in intervals]
    return spans[0] if len(spans) == 1 else spans


def _metres(v) -> list:
    return [round(float(x) * 1000.0, 3) for x in v]


def sampled_position_packet(entity_id: str, epoch: datetime, times: Sequence[float], positions_km,
                            name: str | None = None, intervals=None) -> dict:
    """Earth-fixed samples ``[t, x, y, z, ...]`` in metres, ``t`` relative to ``epoch``."""
    cart = []
    for t, p in zip(times, positions_km):
        cart.append(float(t))
        cart.extend(_metres(p))
    packet = {"id": entity_id, "name": name or entity_id}
    if intervals:
        packet["availability"] = availability(epoch, intervals)
    packet["position"] = {
        "epoch": iso_at(epoch, 0.0),
        "referenceFrame": "FIXED",
        "interpolationAlgorithm": "LAGRANGE",
        "interpolationDegree": 5,
        "cartesian": cart,
    }
    packet["point"] = {"pixelSize": 4}
    return packet


def fixed_position_packet(entity_id: str, position_km, name: str | None = None) -> dict:
    return {
        "id": entity_id,
        "name": name or entity_id,
        "position": {"referenceFrame": "FIXED", "cartesian": _metres(position_km)},
        "point": {"pixelSize": 6},
    }


def link_packet(link_id: str, a: str, b: str, epoch: datetime, intervals=None) -> dict:
    packet = {"id": link_id}
    if intervals:
        packet["availability"] = availability(epoch, intervals)
    packet["polyline"] = {
        "positions": {"references": [f"{a}#position", f"{b}#position"]},
        "width": 1,
        "arcType": "NONE",
    }
    return packet


def write_czml(packets: Iterable[dict], name: str) -> str:
    """JSON array text with the document packet first; entity ids must be unique."""
    out = [document_packet(name)]
    seen = {DOCUMENT_ID}
    for p in packets:
        if p["id"] in seen:
            raise ValueError(f"duplicate CZML id {p['id']!r}")
        seen.add(p["id"])
        out.append(p)
    return json.dumps(out, separators=(",", ":")) + "\n"
