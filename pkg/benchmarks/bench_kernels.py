"""Compare the compiled and pure-Python graph kernels on a snapshot of the bundled table1 scenario.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from leonetsim import kernels
from leonetsim.flowmetrics import sample_pairs
from leonetsim.scenario import Scenario, template


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sources", type=int, default=50)
    ap.add_argument("--pairs", type=int, default=20)
    args = ap.parse_args()

    sc = Scenario(template("table1"))
    snap = sc.snapshot(0.0)
    indptr, indices, weights, _ = snap.csr()
    sources = np.linspace(0, len(snap.node_ids) - 1, args.sources).astype(int)
    demands = sample_pairs(sorted(sc.satellite_ids), args.pairs, 0)
    st = [(snap.index[a], snap.index[b]) for a, b in demands.pairs]
    n = len(snap.node_ids)
    print(f"snapshot: {n} nodes, {snap.num_edges} edges")

    names = [name for name in ("compiled", "python") if name in kernels.BACKENDS]
    results = {}
    for name in names:
        k = kernels.get_backend(name)
        d = _time(lambda: [k.dijkstra(indptr, indices, weights, int(s)) for s in sources], args.repeat)
        f = _time(
            lambda: [k.max_flow(n, snap.edge_a, snap.edge_b, snap.edge_capacity, s, t) for s, t in st],
            args.repeat,
        )
        results[name] = (d, f)
        print(f"{name:9s} dijkstra x{len(sources)}: {d * 1e3:9.2f} ms   max_flow x{len(st)}: {f * 1e3:9.2f} ms")
    if len(results) == 2:
        (cd, cf), (pd, pf) = results["compiled"], results["python"]
        print(f"speedup   dijkstra {pd / cd:6.1f}x   max_flow {pf / cf:6.1f}x")
    else:
        print("compiled backend unavailable; only the Python kernels were timed")


if __name__ == "__main__":
    main()
