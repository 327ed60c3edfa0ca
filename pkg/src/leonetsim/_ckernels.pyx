# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled graph kernels. Same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.queue cimport priority_queue
from libcpp.utility cimport pair

cnp.import_array()

ctypedef long long i64
ctypedef pair[double, i64] item_t

cdef double INF = float("inf")


def dijkstra(indptr, indices, weights, Py_ssize_t source, no_transit=None):
    cdef const long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(n, INF, dtype=np.float64)
    cdef double[::1] dist = out
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] done = done_arr
    cdef const unsigned char[::1] blocked
    cdef bint use_block = no_transit is not None
    if use_block:
        blocked = np.ascontiguousarray(no_transit, dtype=np.uint8)
    else:
        blocked = done_arr

    # max-heap on negated distance
    cdef priority_queue[item_t] heap
    cdef long long u, v, k
    cdef double d, nd
    dist[source] = 0.0
    heap.push(item_t(-0.0, source))
    with nogil:
        while not heap.empty():
            d = -heap.top().first
            u = heap.top().second
            heap.pop()
            if done[u]:
                continue
            done[u] = 1
            if use_block and blocked[u] and u != source:
                continue
            for k in range(ip[u], ip[u + 1]):
                v = ix[k]
                nd = d + w[k]
                if nd < dist[v]:
                    dist[v] = nd
                    heap.push(item_t(-nd, v))
    return out


def max_flow(Py_ssize_t n, tails, heads, caps, Py_ssize_t source, Py_ssize_t sink):
    if source == sink:
        raise ValueError("source and sink must differ")
    cdef const long long[::1] tl = np.ascontiguousarray(tails, dtype=np.int64)
    cdef const long long[::1] hd = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const double[::1] cp = np.ascontiguousarray(caps, dtype=np.float64)
    cdef Py_ssize_t m = tl.shape[0]
    cdef Py_ssize_t k, a, u, v, i

    # CSR over arcs; arc 2k is tail->head, 2k+1 the reverse
    cdef vector[i64] start = vector[i64](n + 1, 0)
    cdef vector[i64] order = vector[i64](2 * m)
    cdef vector[i64] to = vector[i64](2 * m)
    cdef vector[double] res = vector[double](2 * m)
    cdef vector[i64] fill
    cdef double cmax = 0.0
    for k in range(m):
        to[2 * k] = hd[k]
        to[2 * k + 1] = tl[k]
        res[2 * k] = cp[k]
        res[2 * k + 1] = cp[k]
        start[tl[k] + 1] += 1
        start[hd[k] + 1] += 1
        if cp[k] > cmax:
            cmax = cp[k]
    for i in range(n):
        start[i + 1] += start[i]
    fill = vector[i64](start.begin(), start.end())
    for k in range(m):
        order[fill[tl[k]]] = 2 * k
        fill[tl[k]] += 1
        order[fill[hd[k]]] = 2 * k + 1
        fill[hd[k]] += 1
    cdef double eps = cmax * 1e-12

    cdef vector[i64] level = vector[i64](n)
    cdef vector[i64] it = vector[i64](n)
    cdef vector[i64] queue = vector[i64](n)
    cdef vector[i64] stack
    cdef vector[i64] arcs
    cdef Py_ssize_t qh, qt
    cdef double flow = 0.0, push
    cdef bint advanced

    with nogil:
        while True:
            for i in range(n):
                level[i] = -1
            level[source] = 0
            qh = 0
            qt = 0
            queue[qt] = source
            qt += 1
            while qh < qt:
                u = queue[qh]
                qh += 1
                for i in range(start[u], start[u + 1]):
                    a = order[i]
                    if res[a] > eps and level[to[a]] < 0:
                        level[to[a]] = level[u] + 1
                        queue[qt] = to[a]
                        qt += 1
            if level[sink] < 0:
                break
            for i in range(n):
                it[i] = start[i]
            while True:
                stack.clear()
                arcs.clear()
                stack.push_back(source)
                while stack.size() > 0:
                    u = stack.back()
                    if u == sink:
                        break
                    advanced = False
                    while it[u] < start[u + 1]:
                        a = order[it[u]]
                        v = to[a]
                        if res[a] > eps and level[v] == level[u] + 1:
                            stack.push_back(v)
                            arcs.push_back(a)
                            advanced = True
                            break
                        it[u] += 1
                    if not advanced:
                        stack.pop_back()
                        if arcs.size() > 0:
                            a = arcs.back()
                            arcs.pop_back()
                            it[to[a ^ 1]] += 1
                        level[u] = -1
                if stack.size() == 0:
                    break
                push = res[arcs[0]]
                for i in range(<Py_ssize_t>arcs.size()):
                    if res[arcs[i]] < push:
                        push = res[arcs[i]]
                for i in range(<Py_ssize_t>arcs.size()):
                    res[arcs[i]] -= push
                    res[arcs[i] ^ 1] += push
                flow += push
    return flow
