"""Command-line driver: ``leonetsim gen | run | flow | analyze``."""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

from . import __version__
from .fileio.config import ConfigError, load_config, parse_config
from .fileio.ins import InsFormatError, read_ins, write_ins
from .fileio.sce import generate_sce
from .fileio.tables import FLOW_COLUMNS, LATENCY_COLUMNS, SUMMARY_COLUMNS, write_csv
from .flowmetrics import MEAN, SUM, aggregate, flow_report, nearest_rank, sample_pairs
from .routing import (
    LEAST_HOP,
    SHORTEST_PATH,
    STRETCH_FIBER_LIMIT,
    UnknownNode,
    contest,
    edge2edge,
    is_satellite,
    path_churn,
    stretch,
)
from .topology import IslPattern

OUT_ENV = "LEONETSIM_OUT"
METRICS = ("latency", "stretch", "churn")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for config errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV) or ".")


def _need_file(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {p}")
    return p


def _load_sce(path):
    from .scenario import Scenario

    p = _need_file(path, "scenario")
    cfg_path = p / "config.yaml" if p.is_dir() else p
    if not cfg_path.exists():
        raise UsageError(f"no config.yaml in {p}")
    return Scenario(load_config(cfg_path)), cfg_path


def _grid_meta(grid) -> dict:
    return {"step_s": grid.step_s, "count": grid.count, "epoch_s": grid.epoch_s}


# commands


def cmd_gen(args) -> int:
    path = _need_file(args.config, "config file")
    cfg = parse_config(path.read_text(encoding="utf-8"))
    out = Path(args.out) if args.out else _default_out()
    folder = generate_sce(cfg, out)
    print(folder.path)
    return EXIT_OK


def cmd_run(args) -> int:
    sc, cfg_path = _load_sce(args.sce)
    policy = args.policy or sc.cfg.routing.algorithm
    if args.procedure == "edge2edge":
        if not args.pair:
            raise UsageError("edge2edge needs at least one --pair SRC DST")
        for src, dst in args.pair:
            if src == dst:
                raise UsageError(f"--pair endpoints must differ, got {src} twice")
        try:
            series = edge2edge(sc, [tuple(p) for p in args.pair], policy)
        except UnknownNode as exc:
            raise ConfigError("--pair", f"unknown station {exc.args[0]}") from None
    else:
        if args.pair:
            raise UsageError("contest does not take --pair")
        threshold = args.threshold if args.threshold is not None else sc.cfg.contest_threshold
        if threshold <= 0:
            raise UsageError("--threshold must be positive")
        series = contest(sc, policy, threshold=threshold)
    series.meta.update(
        scenario_name=sc.name,
        scenario_digest=sc.digest,
        scenario_path=str(cfg_path.resolve()),
        grid=_grid_meta(sc.grid),
    )
    out = Path(args.out) if args.out else _default_out() / f"{sc.name}_{args.procedure}_{policy}.ins"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(write_ins(series), encoding="utf-8", newline="\n")
    print(f"{len(series.records)} records -> {out}")
    return EXIT_OK


def cmd_flow(args) -> int:
    from .scenario import Scenario

    sc, _ = _load_sce(args.sce)
    cfg = sc.cfg
    if args.structure:
        try:
            pattern = IslPattern.parse(args.structure)
        except ValueError as exc:
            raise ConfigError("--structure", str(exc)) from None
        cfg = dataclasses.replace(cfg, layers=tuple(dataclasses.replace(l, isl=pattern) for l in cfg.layers))
        sc = Scenario(cfg)
    n = args.pairs if args.pairs is not None else cfg.demands.pairs
    seed = args.seed if args.seed is not None else cfg.demands.seed
    agg = args.aggregate or cfg.demands.capacity_aggregate
    if n <= 0:
        raise ConfigError("--pairs", "the demand set must not be empty")
    nodes = sorted(sc.satellite_ids)
    try:
        demands = sample_pairs(nodes, n, seed)
    except ValueError as exc:
        raise ConfigError("--pairs", str(exc)) from None
    structure = " + ".join(sorted({l.isl.label for l in cfg.layers}))
    density = len(nodes)
    reports = [flow_report(sc.snapshot(t, station_ids=()), demands, args.policy, agg) for t in sc.grid]
    rows = [(r.t, structure, density, r.throughput_bps, r.capacity_bps, r.utilization) for r in reports]
    out = Path(args.out) if args.out else _default_out() / f"{cfg.name}_flow.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, FLOW_COLUMNS, rows)
    summary = aggregate(reports)
    srows = [
        (metric, s["mean"], s["p5"], s["p50"], s["p95"])
        for metric, s in ((k, summary[k]) for k in ("throughput_bps", "capacity_bps", "utilization"))
    ]
    summary_path = out.with_name(out.stem + "_summary.csv")
    write_csv(summary_path, SUMMARY_COLUMNS, srows)
    u = summary["utilization"]["mean"]
    print(f"{len(rows)} timestamps, {n} demand pairs, mean utilization {u:.4f} -> {out}")
    return EXIT_OK


def _stretch_source(series, sce_arg):
    """Scenario for endpoint positions: ``--sce`` first, else the path in the header."""
    from .scenario import Scenario

    if sce_arg:
        sc, _ = _load_sce(sce_arg)
    else:
        p = series.meta.get("scenario_path")
        if not p or not Path(p).exists():
            return None
        sc = Scenario(load_config(p))
    want = series.meta.get("scenario_digest")
    if want and want != sc.digest:
        print(f"warning: scenario digest {sc.digest[:12]} does not match the instance header {want[:12]}",
              file=sys.stderr)
    return sc


def _parse_metrics(text: str) -> tuple:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in names if m not in METRICS]
    if bad or not names:
        raise UsageError(f"--metrics takes a comma list of {', '.join(METRICS)}")
    return names


def cmd_analyze(args) -> int:
    path = _need_file(args.ins, "instance file")
    metrics = _parse_metrics(args.metrics)
    series = read_ins(path.read_text(encoding="utf-8"))
    records = sorted(series.records, key=lambda r: (r.src, r.dst, r.t))
    policy = series.meta.get("policy", "")
    sc = _stretch_source(series, args.sce) if records and "stretch" in metrics else None

    churn = {}
    for src, dst in sorted({(r.src, r.dst) for r in records}):
        mine = [r for r in records if (r.src, r.dst) == (src, dst)]
        for r, (_, c) in zip(mine, path_churn(mine)):
            churn[(r.t, src, dst)] = c

    rows, latencies, stretches = [], [], []
    for r in sorted(records, key=lambda r: (r.t, r.src, r.dst)):
        lat = r.latency_s * 1e3 if r.found else None
        st = None
        if r.found and sc is not None and r.src != r.dst:
            a, b = sc.node_position(r.src, r.t), sc.node_position(r.dst, r.t)
            if a is not None and b is not None:
                mode = "shell" if is_satellite(r.src) and is_satellite(r.dst) else "ground"
                st = stretch(r, a, b, mode)
        if lat is not None:
            latencies.append(lat)
        if st is not None:
            stretches.append(st)
        rows.append(
            (
                r.t,
                f"{r.src}-{r.dst}",
                policy,
                lat if "latency" in metrics else None,
                st if "stretch" in metrics else None,
                churn[(r.t, r.src, r.dst)] if "churn" in metrics else None,
            )
        )
    out = Path(args.csv) if args.csv else path.with_suffix(".csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, LATENCY_COLUMNS, rows)

    print(f"{len(records)} records, {len(latencies)} with a path")
    if latencies and "latency" in metrics:
        mean = math.fsum(latencies) / len(latencies)
        print(
            f"latency_ms mean {mean:.3f} p50 {nearest_rank(latencies, 50):.3f} p95 {nearest_rank(latencies, 95):.3f}"
        )
    if stretches:
        frac = sum(s <= STRETCH_FIBER_LIMIT for s in stretches) / len(stretches)
        print(f"stretch <= {STRETCH_FIBER_LIMIT}: {frac:.4f} of {len(stretches)} samples")
    elif "stretch" in metrics and records:
        print("stretch: no scenario available for endpoint positions")
    print(f"table -> {out}")
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    version = f"leonetsim {__version__}"
    parser = _Parser(prog="leonetsim", description="LEO constellation network simulator.")
    parser.add_argument("--version", action="version", version=version)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--version", action="version", version=version)
        return p

    p = add("gen", "Build a .sce scenario folder from a YAML config.")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.set_defaults(func=cmd_gen)

    p = add("run", "Run a routing procedure over a scenario and write a .ins file.")
    p.add_argument("sce", help=".sce folder or config file")
    p.add_argument("procedure", choices=("edge2edge", "contest"))
    p.add_argument("--pair", nargs=2, action="append", metavar=("SRC", "DST"))
    p.add_argument("--policy", choices=(SHORTEST_PATH, LEAST_HOP))
    p.add_argument("--threshold", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = add("flow", "Throughput, capacity and utilization per timestamp.")
    p.add_argument("sce")
    p.add_argument("--pairs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--structure", help='ISL pattern override, e.g. "*Grid 1"')
    p.add_argument("--aggregate", choices=(MEAN, SUM))
    p.add_argument("--policy", choices=(SHORTEST_PATH, LEAST_HOP), default=SHORTEST_PATH)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flow)

    p = add("analyze", "Latency, stretch and churn tables from a .ins file.")
    p.add_argument("ins")
    p.add_argument("--sce", help="scenario for endpoint positions (default: path in the .ins header)")
    p.add_argument("--csv")
    p.add_argument("--metrics", default=",".join(METRICS))
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"leonetsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, InsFormatError) as exc:
        print(f"leonetsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"leonetsim {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
