"""CSV analysis tables (RFC 4180 quoting, '.' decimal point)."""

from __future__ import annotations

import csv
import io

LATENCY_COLUMNS = ("t", "pair", "policy", "latency_ms", "stretch", "churn")
FLOW_COLUMNS = ("t", "structure", "density", "throughput_bps", "capacity_bps", "utilization")
SUMMARY_COLUMNS = ("metric", "mean", "p5", "p50", "p95")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows) -> str:
    text = csv_text(columns, rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text
