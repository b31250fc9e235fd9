"""Compiled inner loop of the chain router."""

import numpy as np
from numba import njit


@njit(cache=True)
def route_chain(indptr, indices, weight, src_ptr, src_nodes):
    """Route one chain towards ``k`` neighbour chains.

    Runs a node-weighted Dijkstra from every neighbour chain (sources cost
    nothing, every other node costs its weight on entry) and picks the root
    minimising ``sum_y cost_y(root)``, where a root lying inside chain ``y``
    is charged its own weight for that chain. Charging the root once per
    neighbour makes crowded roots expensive, which keeps a new chain from
    squatting on a heavily shared hub. The result is the union of the root
    with the back-tracked paths. The heap orders entries by ``(cost, node)``,
    so equal-cost frontiers settle lower node ids first; the root tie-break is
    the lowest id.

    Returns:
        ``(chain, cost)``; ``chain`` is empty and ``cost`` infinite when no
        host node reaches every neighbour chain.
    """
    n = indptr.shape[0] - 1
    k = src_ptr.shape[0] - 1
    pred = np.full((k, n), -1, np.int64)
    total = np.zeros(n)
    dist = np.empty(n)
    # flat binary heap with lazy deletion; every push follows a strict
    # improvement, so sources plus directed edges bound its size
    cap = src_nodes.shape[0] + indices.shape[0] + 1
    hkey = np.empty(cap)
    hnode = np.empty(cap, np.int64)
    for y in range(k):
        dist[:] = np.inf
        size = 0
        for i in range(src_ptr[y], src_ptr[y + 1]):
            s = src_nodes[i]
            dist[s] = 0.0
            pred[y, s] = -2
            j = size
            size += 1
            while j > 0:
                p = (j - 1) >> 1
                if hkey[p] > 0.0 or (hkey[p] == 0.0 and hnode[p] > s):
                    hkey[j] = hkey[p]
                    hnode[j] = hnode[p]
                    j = p
                else:
                    break
            hkey[j] = 0.0
            hnode[j] = s
        while size > 0:
            d = hkey[0]
            u = hnode[0]
            size -= 1
            if size > 0:
                lk = hkey[size]
                lv = hnode[size]
                j = 0
                while True:
                    c = 2 * j + 1
                    if c >= size:
                        break
                    if c + 1 < size and (hkey[c + 1] < hkey[c] or (hkey[c + 1] == hkey[c] and hnode[c + 1] < hnode[c])):
                        c += 1
                    if hkey[c] < lk or (hkey[c] == lk and hnode[c] < lv):
                        hkey[j] = hkey[c]
                        hnode[j] = hnode[c]
                        j = c
                    else:
                        break
                hkey[j] = lk
                hnode[j] = lv
            if d > dist[u]:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                nd = d + weight[v]
                if nd < dist[v]:
                    dist[v] = nd
                    pred[y, v] = u
                    j = size
                    size += 1
                    while j > 0:
                        p = (j - 1) >> 1
                        if hkey[p] > nd or (hkey[p] == nd and hnode[p] > v):
                            hkey[j] = hkey[p]
                            hnode[j] = hnode[p]
                            j = p
                        else:
                            break
                    hkey[j] = nd
                    hnode[j] = v
        for v in range(n):
            if pred[y, v] == -2:
                total[v] += weight[v]
            elif dist[v] == np.inf:
                total[v] = np.inf
            else:
                total[v] += dist[v]

    best = -1
    best_cost = np.inf
    for v in range(n):
        if total[v] < best_cost:
            best_cost = total[v]
            best = v
    if best < 0:
        return np.empty(0, np.int64), np.inf

    mark = np.zeros(n, np.bool_)
    mark[best] = True
    count = 1
    for y in range(k):
        v = best
        if pred[y, v] == -2:
            continue
        while True:
            p = pred[y, v]
            if pred[y, p] == -2:
                break
            if not mark[p]:
                mark[p] = True
                count += 1
            v = p
    chain = np.empty(count, np.int64)
    j = 0
    for v in range(n):
        if mark[v]:
            chain[j] = v
            j += 1
    return chain, best_cost
