"""Compiled kernels for the multiplicative-weights concurrent flow solver."""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit


@njit(cache=True)
def _dijkstra(source, n, out_ptr, out_edge, dst, length, dist, pred, order):
    """Shortest-path tree from ``source``; fills dist, pred (edge into node) and
    ``order`` (nodes by settle time). Returns the number of settled nodes."""
    for v in range(n):
        dist[v] = np.inf
        pred[v] = -1
    dist[source] = 0.0
    heap = [(0.0, source)]
    settled = np.zeros(n, dtype=np.bool_)
    count = 0
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        order[count] = u
        count += 1
        for p in range(out_ptr[u], out_ptr[u + 1]):
            e = out_edge[p]
            w = dst[e]
            nd = d + length[e]
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                heapq.heappush(heap, (nd, w))
    return count


@njit(cache=True)
def _tree_load(n, src, pred, order, count, amount, load):
    """Edge loads when ``amount[v]`` is sent to every v along the tree."""
    load[:] = 0.0
    sub = amount.copy()
    for idx in range(count - 1, 0, -1):
        v = order[idx]
        e = pred[v]
        load[e] += sub[v]
        sub[src[e]] += sub[v]


@njit(cache=True)
def _dual_ratio(n, sources, demand, out_ptr, out_edge, src, dst, cap, length):
    """sum_e c(e) l(e) / sum_k sum_v D[k,v] dist_l(s_k, v): an upper bound on throughput."""
    dist = np.empty(n)
    pred = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    alpha = 0.0
    for k in range(len(sources)):
        _dijkstra(sources[k], n, out_ptr, out_edge, dst, length, dist, pred, order)
        for v in range(n):
            if demand[k, v] > 0.0:
                alpha += demand[k, v] * dist[v]
    vol = 0.0
    for e in range(len(cap)):
        vol += cap[e] * length[e]
    return vol / alpha


@njit(cache=True)
def run_phases(n, sources, demand, out_ptr, out_edge, src, dst, cap, step, target_ratio, max_phases):
    """Route the full demand once per phase on current shortest paths, growing
    edge lengths multiplicatively with relative load.

    Stops once best_upper / lower <= target_ratio, where lower is the
    throughput of the accumulated flow scaled to fit capacities and
    best_upper is the smallest dual ratio observed. Returns
    (flows per commodity and edge, phases, best_upper).
    """
    m = len(cap)
    K = len(sources)
    length = 1.0 / cap
    flows = np.zeros((K, m))
    total = np.zeros(m)
    load = np.zeros(m)
    dist = np.empty(n)
    pred = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    best_upper = np.inf
    phases = 0
    while phases < max_phases:
        for k in range(K):
            remaining = demand[k].copy()
            frac_left = 1.0
            while frac_left > 1e-12:
                count = _dijkstra(sources[k], n, out_ptr, out_edge, dst, length, dist, pred, order)
                _tree_load(n, src, pred, order, count, remaining, load)
                sigma = 1.0
                for e in range(m):
                    if load[e] > cap[e] * sigma:
                        sigma = cap[e] / load[e]
                for e in range(m):
                    if load[e] > 0.0:
                        f = sigma * load[e]
                        flows[k, e] += f
                        total[e] += f
                        length[e] *= 1.0 + step * f / cap[e]
                for v in range(n):
                    remaining[v] *= 1.0 - sigma
                frac_left *= 1.0 - sigma
                if sigma >= 1.0:
                    break
        phases += 1
        top = length.max()
        for e in range(m):
            length[e] /= top
        upper = _dual_ratio(n, sources, demand, out_ptr, out_edge, src, dst, cap, length)
        if upper < best_upper:
            best_upper = upper
        congestion = 0.0
        for e in range(m):
            r = total[e] / cap[e]
            if r > congestion:
                congestion = r
        lower = phases / congestion
        if best_upper <= lower * target_ratio:
            break
    return flows, phases, best_upper
