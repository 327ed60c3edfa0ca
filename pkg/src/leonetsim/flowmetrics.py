"""Edge-disjoint throughput, max-flow capacity, utilization and summaries."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .routing import SHORTEST_PATH, Router, RoutingPolicy
from .topology import TopologySnapshot

MEAN = "mean"
SUM = "sum"


@dataclass(frozen=True)
class DemandSet:
    pairs: tuple
    seed: int

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("demand pairs must be distinct")
        for src, dst in self.pairs:
            if src == dst:
                raise ValueError(f"demand {src}->{dst} has identical endpoints")

    def __len__(self):
        return len(self.pairs)


@dataclass
class FlowReport:
    t: float
    throughput_bps: float
    capacity_bps: float
    utilization: float
    per_pair: list = field(default_factory=list)


def sample_pairs(nodes: Sequence[str], n: int, seed: int) -> DemandSet:
    """``n`` distinct ordered pairs, drawn uniformly without replacement."""
    k = len(nodes)
    total = k * (k - 1)
    if n < 0 or n > total:
        raise ValueError(f"cannot draw {n} distinct ordered pairs from {k} nodes")
    rng = np.random.default_rng(seed)
    picks = rng.choice(total, size=n, replace=False) if n else []
    pairs = []
    for code in np.asarray(picks, dtype=np.int64).tolist():
        i, j = divmod(code, k - 1)
        if j >= i:
            j += 1
        pairs.append((nodes[i], nodes[j]))
    return DemandSet(tuple(pairs), seed)


def throughput(snapshot: TopologySnapshot, demands: DemandSet | Sequence, policy: RoutingPolicy | str = SHORTEST_PATH):
    """System throughput with edge-disjoint paths.

    Demands are routed in order on a residual graph from which every edge
    of an earlier accepted path is deleted. A routed demand contributes the
    bottleneck capacity of its path; an unroutable one contributes 0.
    Returns ``(system_throughput_bps, per_pair)`` where ``per_pair`` lists
    ``((src, dst), bottleneck_bps)`` in demand order.
    """
    if isinstance(policy, str):
        policy = RoutingPolicy.named(policy)
    pairs = demands.pairs if isinstance(demands, DemandSet) else tuple(demands)
    alive = np.ones(snapshot.num_edges, dtype=bool)
    per_pair = []
    by_source = defaultdict(list)
    residual = snapshot
    for src, dst in pairs:
        router = Router(residual, policy)
        rec = router.route(src, dst)
        if rec.found and rec.hops > 0:
            local = router.path_edge_ids(rec)
            bottleneck = float(min(residual.edge_capacity[local]))
            # map residual edge ids back to the original snapshot
            originals = np.flatnonzero(alive)[local]
            alive[originals] = False
            residual = snapshot.without_edges(np.flatnonzero(~alive))
        else:
            bottleneck = 0.0
        per_pair.append(((src, dst), bottleneck))
        by_source[src].append(bottleneck)
    total = sum(sum(v) / len(v) for v in by_source.values())
    return total, per_pair


def max_flow(snapshot: TopologySnapshot, src: str, dst: str) -> float:
    """Exact s-t max-flow; every undirected edge carries its capacity in each direction."""
    if src == dst:
        raise ValueError("max_flow needs distinct endpoints")
    s, t = snapshot.index[src], snapshot.index[dst]
    if np.any(snapshot.edge_capacity < 0):
        raise ValueError("capacities must be non-negative")
    return float(
        kernels.max_flow(len(snapshot.node_ids), snapshot.edge_a, snapshot.edge_b, snapshot.edge_capacity, s, t)
    )


def network_capacity(snapshot: TopologySnapshot, demands: DemandSet | Sequence, aggregate: str = MEAN,
                     flows: Sequence[float] | None = None) -> float:
    pairs = demands.pairs if isinstance(demands, DemandSet) else tuple(demands)
    if not pairs:
        raise ValueError("network_capacity needs at least one demand pair")
    if flows is None:
        flows = [max_flow(snapshot, s, d) for s, d in pairs]
    if aggregate == MEAN:
        return float(sum(flows) / len(flows))
    if aggregate == SUM:
        return float(sum(flows))
    raise ValueError(f"unknown capacity aggregation {aggregate!r}")


def flow_report(snapshot: TopologySnapshot, demands: DemandSet, policy: RoutingPolicy | str = SHORTEST_PATH,
                aggregate: str = MEAN) -> FlowReport:
    tput, routed = throughput(snapshot, demands, policy)
    flows = [max_flow(snapshot, s, d) for s, d in demands.pairs]
    cap = network_capacity(snapshot, demands, aggregate, flows=flows)
    util = tput / cap if cap > 0 else 0.0
    per_pair = [(pair, bott, f) for (pair, bott), f in zip(routed, flows)]
    return FlowReport(snapshot.t, tput, cap, util, per_pair)


def nearest_rank(values: Sequence[float], pct: float) -> float:
    ordered = sorted(values)
    if not ordered:
        raise ValueError("percentile of an empty sequence")
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


def summarize(values: Sequence[float]) -> dict:
    vals = [float(v) for v in values]
    return {
        "mean": math.fsum(vals) / len(vals),
        "p5": nearest_rank(vals, 5),
        "p50": nearest_rank(vals, 50),
        "p95": nearest_rank(vals, 95),
    }


def aggregate(reports: Sequence[FlowReport]) -> dict:
    if not reports:
        raise ValueError("aggregate needs at least one report")
    ordered = sorted(reports, key=lambda r: r.t)
    return {
        "throughput_bps": summarize([r.throughput_bps for r in ordered]),
        "capacity_bps": summarize([r.capacity_bps for r in ordered]),
        "utilization": summarize([r.utilization for r in ordered]),
        "series": [(r.t, r.throughput_bps, r.capacity_bps, r.utilization) for r in ordered],
    }
