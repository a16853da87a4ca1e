"""Hot loops of the two simulators.

Written in the numba subset; with ``AOIMCAST_BACKEND=numpy`` they run as
plain Python with the per-transmission sampling vectorised in numpy.

Shared conventions
------------------
* Node ids number the tree level by level: ``offsets[d]`` is the id of the
  first node at depth d, and the children of node ``offsets[d] + q`` are
  ``offsets[d+1] + q * n_{d+1} + c``.  The tagged path is the chain of
  ``q = 0`` nodes.
* Update ``j`` drawn at node ``v`` uses the stream ``(seed, v, j)``.
* A transmitter that is idle at (or exactly at the end of its busy period
  at) an arrival accepts it; otherwise the arrival is dropped.
* Per-hop statistics rows (``stats[hop]``) hold the ``ST_*`` columns below
  and only count updates with index ``j >= warm``.
"""
from __future__ import annotations

import heapq

import numpy as np

from .._accel import USE_NUMBA, jit
from .rng import PURPOSE_ARRIVAL, PURPOSE_DELAY, fill_exponentials, stream_key, uniform_at

ARRIVAL_WILL = 0
ARRIVAL_POISSON = 1
ARRIVAL_DETERMINISTIC = 2

# columns of the per-hop statistics table
ST_NY = 0        # completed transmitter cycles Y observed
ST_SUM_Z = 1
ST_SUM_Z2 = 2
ST_SUM_Y = 3
ST_SUM_Y2 = 4
ST_TX = 5        # transmissions started
ST_RX = 6        # child receptions
ST_OFFERED = 7   # child slots offered (tagged: 1 per transmission; full tree: n)
ST_NM = 8        # receptions with a previous reception (M and S observed)
ST_SUM_M = 9
ST_SUM_M2 = 10
ST_SUM_S = 11
ST_SUM_S2 = 12
N_STATS = 13

EV_GEN = 0
EV_DELIVER = 1


if USE_NUMBA:
    @jit
    def prefix_order_stats(key, n, k, rate, shift, buf, out):
        """``out[:k]`` <- the k smallest of n shifted exponentials (spacings, stream idx 1..k)."""
        fill_exponentials(key, 1, k, buf)
        s = 0.0
        for i in range(k):
            s += buf[i] / (rate * (n - i))
            out[i] = shift + s

    @jit
    def link_delays(key, n, rate, shift, out):
        fill_exponentials(key, 0, n, out)
        for i in range(n):
            out[i] = shift + out[i] / rate
else:
    def prefix_order_stats(key, n, k, rate, shift, buf, out):
        """``out[:k]`` <- the k smallest of n shifted exponentials (spacings, stream idx 1..k)."""
        fill_exponentials(key, 1, k, buf)
        out[:k] = shift + np.cumsum(buf[:k] / (rate * np.arange(n, n - k, -1)))

    def link_delays(key, n, rate, shift, out):
        fill_exponentials(key, 0, n, out)
        out[:n] = shift + out[:n] / rate


@jit
def _next_arrival(seed, j, prev, mode, param):
    if mode == ARRIVAL_POISSON:
        u = uniform_at(stream_key(seed, 0, j, PURPOSE_ARRIVAL), 0)
        return prev - np.log1p(-u) / param
    return j * param


@jit
def tagged_path_kernel(ns, ks, rates, shifts, offsets, seed, cycles, warm,
                       arrival_mode, arrival_param, stats, gen_times, rec_t, rec_g, counts):
    """Simulate one root-to-leaf chain; returns the number of leaf receptions.

    For each transmission the tagged child's rank among the n children is
    uniform on 1..n and independent of the order statistics, so one uniform
    plus the k smallest order statistics decide both whether and when the
    tagged child receives.
    """
    L = ns.shape[0]
    kmax = 0
    for d in range(L):
        if ks[d] > kmax:
            kmax = ks[d]
    buf = np.empty(kmax)
    xs = np.empty(kmax)
    busy_until = np.zeros(L)
    last_start = np.zeros(L)
    started = np.zeros(L, dtype=np.bool_)
    ncycles = np.zeros(L, dtype=np.int64)
    succ_cycle = np.zeros(L, dtype=np.int64)
    succ_start = np.zeros(L)
    has_succ = np.zeros(L, dtype=np.bool_)
    nrec = 0
    g = 0.0
    for j in range(cycles + 1):
        if arrival_mode == ARRIVAL_WILL:
            g = busy_until[0]
        else:
            g = _next_arrival(seed, j, g, arrival_mode, arrival_param)
        gen_times[j] = g
        if j == cycles:
            break
        if g < busy_until[0]:
            counts[1] += 1
            continue
        measuring = j >= warm
        t = g
        for d in range(L):
            n = ns[d]
            k = ks[d]
            if measuring and started[d]:
                z = t - busy_until[d]
                y = t - last_start[d]
                stats[d, ST_NY] += 1
                stats[d, ST_SUM_Z] += z
                stats[d, ST_SUM_Z2] += z * z
                stats[d, ST_SUM_Y] += y
                stats[d, ST_SUM_Y2] += y * y
            key = stream_key(seed, offsets[d], j, PURPOSE_DELAY)
            rank = 1 + int(uniform_at(key, 0) * n)
            prefix_order_stats(key, n, k, rates[d], shifts[d], buf, xs)
            busy_until[d] = t + xs[k - 1]
            last_start[d] = t
            started[d] = True
            ncycles[d] += 1
            if measuring:
                stats[d, ST_TX] += 1
                stats[d, ST_OFFERED] += 1
            if rank > k:
                counts[2] += 1
                break
            if measuring:
                stats[d, ST_RX] += 1
                if has_succ[d]:
                    m = ncycles[d] - succ_cycle[d]
                    s = t - succ_start[d]
                    stats[d, ST_NM] += 1
                    stats[d, ST_SUM_M] += m
                    stats[d, ST_SUM_M2] += m * m
                    stats[d, ST_SUM_S] += s
                    stats[d, ST_SUM_S2] += s * s
            succ_cycle[d] = ncycles[d]
            succ_start[d] = t
            has_succ[d] = True
            t_recv = t + xs[rank - 1]
            if d == L - 1:
                rec_t[nrec] = t_recv
                rec_g[nrec] = g
                nrec += 1
                counts[0] += 1
            elif t_recv >= busy_until[d + 1]:
                t = t_recv
            else:
                counts[1] += 1
                break
    return nrec


@jit
def full_tree_kernel(ns, ks, rates, shifts, offsets, seed, cycles, warm, batches,
                     arrival_mode, arrival_param, stats, gen_times, batch_area, batch_edges, counts):
    """Event-driven simulation of the whole tree; returns the number of events.

    Every end node's age integral is accumulated between batch boundaries,
    which sit at the generation times of updates ``warm + b * m`` and
    ``cycles``.  Events are ordered by (time, node id, sequence number).
    """
    L = ns.shape[0]
    total = offsets[L + 1]
    leaf0 = offsets[L]
    below = np.ones(L + 1, dtype=np.int64)
    for d in range(L - 1, -1, -1):
        below[d] = below[d + 1] * ns[d]
    depth = np.empty(total, dtype=np.int64)
    for d in range(L + 1):
        for v in range(offsets[d], offsets[d + 1]):
            depth[v] = d
    nmax = 0
    for d in range(L):
        if ns[d] > nmax:
            nmax = ns[d]
    xs = np.empty(nmax)

    busy_until = np.zeros(total)
    last_start = np.zeros(total)
    started = np.zeros(total, dtype=np.bool_)
    ncycles = np.zeros(total, dtype=np.int64)
    succ_cycle = np.zeros(total, dtype=np.int64)
    succ_start = np.zeros(total)
    has_succ = np.zeros(total, dtype=np.bool_)
    tau = np.zeros(total)
    stamp = np.zeros(total)

    per_batch = (cycles - warm) // batches
    window_open = False
    batch = 0
    area = 0.0
    seq = 0
    nevents = 0
    heap = [(0.0, np.int64(0), np.int64(0), np.int64(EV_GEN), np.int64(0), 0.0, 0.0, np.int64(0))]
    while len(heap) > 0:
        t, v, _, kind, j, gen, pstart, pcycle = heapq.heappop(heap)
        nevents += 1
        if kind == EV_GEN:
            gen_times[j] = t
            if j == warm:
                window_open = True
                batch_edges[0] = t
                for w in range(leaf0, total):
                    tau[w] = t
            elif window_open and (j == cycles or ((j - warm) % per_batch == 0 and (j - warm) // per_batch < batches)):
                for w in range(leaf0, total):
                    area += (t - tau[w]) * ((t + tau[w]) * 0.5 - stamp[w])
                    tau[w] = t
                batch_area[batch] = area
                area = 0.0
                batch += 1
                batch_edges[batch] = t
                if j == cycles:
                    window_open = False
            if j == cycles:
                continue
            if arrival_mode != ARRIVAL_WILL:
                seq += 1
                heapq.heappush(heap, (_next_arrival(seed, j + 1, t, arrival_mode, arrival_param),
                                      np.int64(0), np.int64(seq), np.int64(EV_GEN), np.int64(j + 1),
                                      0.0, 0.0, np.int64(0)))
                if t < busy_until[0]:
                    counts[1] += below[0]
                    continue
            gen = t
        else:
            d = depth[v]
            if j >= warm:
                if has_succ[v]:
                    m = pcycle - succ_cycle[v]
                    s = pstart - succ_start[v]
                    stats[d - 1, ST_NM] += 1
                    stats[d - 1, ST_SUM_M] += m
                    stats[d - 1, ST_SUM_M2] += m * m
                    stats[d - 1, ST_SUM_S] += s
                    stats[d - 1, ST_SUM_S2] += s * s
            succ_cycle[v] = pcycle
            succ_start[v] = pstart
            has_succ[v] = True
            if d == L:
                if window_open:
                    area += (t - tau[v]) * ((t + tau[v]) * 0.5 - stamp[v])
                tau[v] = t
                stamp[v] = gen
                counts[0] += 1
                continue
            if t < busy_until[v]:
                counts[1] += below[d]
                continue

        # node v accepts update j at time t and transmits it
        d = depth[v]
        n = ns[d]
        k = ks[d]
        if j >= warm:
            if started[v]:
                z = t - busy_until[v]
                y = t - last_start[v]
                stats[d, ST_NY] += 1
                stats[d, ST_SUM_Z] += z
                stats[d, ST_SUM_Z2] += z * z
                stats[d, ST_SUM_Y] += y
                stats[d, ST_SUM_Y2] += y * y
            stats[d, ST_TX] += 1
            stats[d, ST_RX] += k
            stats[d, ST_OFFERED] += n
        key = stream_key(seed, v, j, PURPOSE_DELAY)
        link_delays(key, n, rates[d], shifts[d], xs)
        order = np.argsort(xs[:n], kind="mergesort")
        xk = xs[order[k - 1]]
        busy_until[v] = t + xk
        last_start[v] = t
        started[v] = True
        ncycles[v] += 1
        counts[2] += (n - k) * below[d + 1]
        child0 = offsets[d + 1] + (v - offsets[d]) * n
        for i in range(k):
            c = order[i]
            seq += 1
            heapq.heappush(heap, (t + xs[c], np.int64(child0 + c), np.int64(seq), np.int64(EV_DELIVER),
                                  np.int64(j), gen, t, np.int64(ncycles[v])))
        if v == 0 and arrival_mode == ARRIVAL_WILL:
            seq += 1
            heapq.heappush(heap, (t + xk, np.int64(0), np.int64(seq), np.int64(EV_GEN), np.int64(j + 1),
                                  0.0, 0.0, np.int64(0)))
    return nevents
