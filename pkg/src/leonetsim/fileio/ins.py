"""``.ins`` instance files: one JSON header line, then one JSON object per path record."""

from __future__ import annotations

import json

from ..routing import InstanceSeries, PathRecord

FORMAT_TAG = "leonetsim-ins/1"
_RECORD_KEYS = ("t", "src", "dst", "nodes", "prop_distance_km", "latency_s", "hops", "found")


class InsFormatError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _record_dict(r: PathRecord) -> dict:
    return {
        "t": r.t,
        "src": r.src,
        "dst": r.dst,
        "nodes": list(r.nodes),
        "prop_distance_km": r.prop_distance_km,
        "latency_s": r.latency_s,
        "hops": r.hops,
        "found": r.found,
    }


def write_ins(series: InstanceSeries) -> str:
    header = {"format": FORMAT_TAG, **series.meta}
    lines = [json.dumps(header, sort_keys=True)]
    for r in sorted(series.records, key=lambda r: (r.t, r.src, r.dst)):
        lines.append(json.dumps(_record_dict(r)))
    return "\n".join(lines) + "\n"


def read_ins(text: str) -> InstanceSeries:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise InsFormatError(1, "missing header line")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise InsFormatError(1, f"header is not JSON ({exc.msg})") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT_TAG:
        raise InsFormatError(1, f"header must be an object with format {FORMAT_TAG!r}")
    meta = {k: v for k, v in header.items() if k != "format"}
    records = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InsFormatError(n, f"not JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or set(obj) != set(_RECORD_KEYS):
            raise InsFormatError(n, f"record must have exactly the keys {', '.join(_RECORD_KEYS)}")
        try:
            rec = PathRecord(
                float(obj["t"]),
                str(obj["src"]),
                str(obj["dst"]),
                tuple(str(x) for x in obj["nodes"]),
                float(obj["prop_distance_km"]),
                float(obj["latency_s"]),
                int(obj["hops"]),
                bool(obj["found"]),
            )
        except (TypeError, ValueError) as exc:
            raise InsFormatError(n, f"bad field value ({exc})") from None
        if rec.found and rec.hops != len(rec.nodes) - 1:
            raise InsFormatError(n, "hops does not match the node list")
        records.append(rec)
    return InstanceSeries(meta, records)
