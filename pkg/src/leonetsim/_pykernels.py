"""Pure-Python graph kernels.

Reference twins of the routines in ``_ckernels.pyx``. Both take the same
CSR arrays and return the same values; ``leonetsim.kernels`` picks one at
import time.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np

INF = float("inf")


def dijkstra(indptr, indices, weights, source, no_transit=None):
    """Single-source shortest distances over a CSR graph.

    Nodes flagged in ``no_transit`` are reachable but never expanded,
    except when they are the source itself.
    """
    n = len(indptr) - 1
    indptr = indptr.tolist() if hasattr(indptr, "tolist") else list(indptr)
    indices = indices.tolist() if hasattr(indices, "tolist") else list(indices)
    weights = weights.tolist() if hasattr(weights, "tolist") else list(weights)
    blocked = None
    if no_transit is not None:
        blocked = no_transit.tolist() if hasattr(no_transit, "tolist") else list(no_transit)

    dist = [INF] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if blocked is not None and blocked[u] and u != source:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.asarray(dist, dtype=np.float64)


def max_flow(n, tails, heads, caps, source, sink):
    """Dinic max-flow on an undirected graph.

    Each undirected edge becomes a pair of mutually reverse arcs that both
    start with the full edge capacity.
    """
    if source == sink:
        raise ValueError("source and sink must differ")
    m = len(tails)
    tails = tails.tolist() if hasattr(tails, "tolist") else list(tails)
    heads = heads.tolist() if hasattr(heads, "tolist") else list(heads)
    caps = caps.tolist() if hasattr(caps, "tolist") else list(caps)

    # arc 2k: tail->head, arc 2k+1: head->tail; reverse of arc a is a ^ 1
    to = [0] * (2 * m)
    res = [0.0] * (2 * m)
    adj = [[] for _ in range(n)]
    cmax = 0.0
    for k in range(m):
        u, v, c = tails[k], heads[k], float(caps[k])
        to[2 * k] = v
        to[2 * k + 1] = u
        res[2 * k] = c
        res[2 * k + 1] = c
        adj[u].append(2 * k)
        adj[v].append(2 * k + 1)
        if c > cmax:
            cmax = c
    eps = cmax * 1e-12

    flow = 0.0
    while True:
        level = [-1] * n
        level[source] = 0
        q = deque([source])
        while q:
            u = q.popleft()
            for a in adj[u]:
                if res[a] > eps and level[to[a]] < 0:
                    level[to[a]] = level[u] + 1
                    q.append(to[a])
        if level[sink] < 0:
            break
        it = [0] * n

        # iterative blocking-flow search with current-arc pointers
        while True:
            stack = [source]
            arcs = []
            while stack:
                u = stack[-1]
                if u == sink:
                    break
                advanced = False
                while it[u] < len(adj[u]):
                    a = adj[u][it[u]]
                    v = to[a]
                    if res[a] > eps and level[v] == level[u] + 1:
                        stack.append(v)
                        arcs.append(a)
                        advanced = True
                        break
                    it[u] += 1
                if not advanced:
                    stack.pop()
                    if arcs:
                        back = arcs.pop()
                        it[to[back ^ 1]] += 1
                    level[u] = -1
            if not stack:
                break
            push = min(res[a] for a in arcs)
            for a in arcs:
                res[a] -= push
                res[a ^ 1] += push
            flow += push
    return flow
