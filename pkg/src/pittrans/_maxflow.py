"""FIFO push-relabel (first phase only) with periodic global relabelling.

The network is a residual graph in CSR form: arcs leaving node ``u`` are
``start[u]:start[u + 1]``, ``twin[e]`` is the reverse residual arc of
``e``. Capacities are int64 and are updated in place.

Only a maximum preflow is computed. That is enough for a minimum cut: after
the final global relabel every node that can still reach the sink in the
residual graph has a label below ``n``, every other node has label ``n``.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _global_relabel(n, s, t, start, to, cap, twin, height, bfs):
    height[:] = n
    height[t] = 0
    bfs[0] = t
    head, tail = 0, 1
    while head < tail:
        v = bfs[head]
        head += 1
        hv = height[v] + 1
        for e in range(start[v], start[v + 1]):
            w = to[e]
            if height[w] == n and w != s and cap[twin[e]] > 0:
                height[w] = hv
                bfs[tail] = w
                tail += 1


@njit(cache=True, nogil=True)
def max_preflow(n, s, t, start, to, cap, twin):
    """Saturate a maximum preflow; returns the final node labels."""
    m = to.shape[0]
    excess = np.zeros(n, np.int64)
    height = np.empty(n, np.int64)
    bfs = np.empty(n, np.int64)
    cur = start[:-1].copy()
    queue = np.empty(n, np.int64)
    inq = np.zeros(n, np.bool_)

    for e in range(start[s], start[s + 1]):
        c = cap[e]
        if c > 0:
            cap[e] = 0
            cap[twin[e]] += c
            excess[to[e]] += c

    _global_relabel(n, s, t, start, to, cap, twin, height, bfs)
    qh = 0
    qn = 0
    for v in range(n):
        if v != s and v != t and excess[v] > 0 and height[v] < n:
            queue[(qh + qn) % n] = v
            qn += 1
            inq[v] = True

    work = 0
    relabel_every = 6 * n + m // 2
    while qn > 0:
        if work > relabel_every:
            work = 0
            _global_relabel(n, s, t, start, to, cap, twin, height, bfs)
            for v in range(n):
                cur[v] = start[v]
                inq[v] = False
            qh = 0
            qn = 0
            for v in range(n):
                if v != s and v != t and excess[v] > 0 and height[v] < n:
                    queue[qn] = v
                    qn += 1
                    inq[v] = True
            if qn == 0:
                break

        u = queue[qh]
        qh = (qh + 1) % n
        qn -= 1
        inq[u] = False

        while excess[u] > 0 and height[u] < n:
            e = cur[u]
            if e == start[u + 1]:
                minh = 2 * n
                for f in range(start[u], start[u + 1]):
                    if cap[f] > 0 and height[to[f]] < minh:
                        minh = height[to[f]]
                work += 12 + start[u + 1] - start[u]
                height[u] = min(minh + 1, n)
                cur[u] = start[u]
                continue
            v = to[e]
            if cap[e] > 0 and height[u] == height[v] + 1:
                d = excess[u] if excess[u] < cap[e] else cap[e]
                cap[e] -= d
                cap[twin[e]] += d
                excess[u] -= d
                excess[v] += d
                if v != t and v != s and not inq[v]:
                    queue[(qh + qn) % n] = v
                    qn += 1
                    inq[v] = True
                if cap[e] == 0:
                    cur[u] = e + 1
            else:
                cur[u] = e + 1

    _global_relabel(n, s, t, start, to, cap, twin, height, bfs)
    return height


def residual_csr(n, tails, heads, caps):
    """Build CSR residual arrays (start, to, cap, twin) from forward arcs."""
    m = len(tails)
    rt = np.empty(2 * m, np.int64)
    rh = np.empty(2 * m, np.int64)
    rc = np.zeros(2 * m, np.int64)
    rt[0::2], rt[1::2] = tails, heads
    rh[0::2], rh[1::2] = heads, tails
    rc[0::2] = caps
    order = np.argsort(rt, kind="stable")
    pos = np.empty(2 * m, np.int64)
    pos[order] = np.arange(2 * m)
    to = rh[order]
    cap = rc[order]
    twin = pos[order ^ 1]
    start = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(rt, minlength=n), out=start[1:])
    return start, to, cap, twin
