"""Compiled per-point loops shared by the oracle and the exact baseline.

Every function here is compiled twice from the same source: a cached serial
variant (``SERIAL``) and, on demand, a ``parallel=True`` variant whose
``prange`` loops run on numba's thread pool.  Per-point loops only ever
write slot ``i`` of their outputs; reductions happen afterwards in a fixed
order, so both variants return identical bits.

Oracle layout: ``dist[s, i]`` holds the squared sketch distance from point
``i`` to the center occupying slot ``s``; ``slot_center[s]`` is that center
(-1 for a free slot).  Per point, ``mv``/``ms`` hold the distance and slot
of the nearest center and ``m2v``/``m2s`` those of the runner-up, both in
``(distance, center index)`` order.
"""

from __future__ import annotations

import os
from collections import namedtuple
from types import SimpleNamespace

import numba
import numpy as np
from numba import njit, prange

_BLOCK = 128

Top = namedtuple("Top", "min_val min_slot min2_val min2_slot")


def new_top(n: int) -> Top:
    return Top(np.full(n, np.inf), np.full(n, -1, np.int64), np.full(n, np.inf), np.full(n, -1, np.int64))


@njit(inline="always")
def _sq(X, i, j):
    s = 0.0
    for t in range(X.shape[1]):
        diff = X[i, t] - X[j, t]
        s += diff * diff
    return s


@njit(cache=True)
def _pairwise_sum(x):
    # blocked pairwise summation: sequential inside 128-element blocks, tree above
    n = x.shape[0]
    if n == 0:
        return 0.0
    nb = (n + _BLOCK - 1) // _BLOCK
    part = np.empty(nb)
    for b in range(nb):
        s = 0.0
        for i in range(b * _BLOCK, min(n, (b + 1) * _BLOCK)):
            s += x[i]
        part[b] = s
    while nb > 1:
        half = nb // 2
        for b in range(half):
            part[b] = part[2 * b] + part[2 * b + 1]
        if nb % 2:
            part[half] = part[nb - 1]
            nb = half + 1
        else:
            nb = half
    return part[0]


@njit(inline="always")
def _before(v, c, w, d):
    # lexicographic (distance, center index) order
    return v < w or (v == w and c < d)


@njit(inline="always")
def _offer(i, v, s, center, slot_center, mv, ms, m2v, m2s):
    m1 = ms[i]
    if m1 < 0 or _before(v, center, mv[i], slot_center[m1]):
        m2v[i] = mv[i]
        m2s[i] = m1
        mv[i] = v
        ms[i] = s
        return
    m2 = m2s[i]
    if m2 < 0 or _before(v, center, m2v[i], slot_center[m2]):
        m2v[i] = v
        m2s[i] = s


@njit(inline="always")
def _recompute_row(i, dist, active, slot_center, mv, ms, m2v, m2s):
    mv[i] = np.inf
    ms[i] = -1
    m2v[i] = np.inf
    m2s[i] = -1
    for r in range(active.shape[0]):
        t = active[r]
        _offer(i, dist[t, i], t, slot_center[t], slot_center, mv, ms, m2v, m2s)


def pair_sq_dist(X, i, j):
    return _sq(X, i, j)


def insert_slot(Q, j, s, reuse, dist, slot_center, mv, ms, m2v, m2s):
    """Add center ``j`` in slot ``s``; ``reuse`` keeps the row already stored there."""
    for i in prange(Q.shape[0]):
        if reuse:
            v = dist[s, i]
        else:
            v = _sq(Q, i, j)
            dist[s, i] = v
        _offer(i, v, s, j, slot_center, mv, ms, m2v, m2s)
    slot_center[s] = j


def delete_slot(s, active, dist, slot_center, mv, ms, m2v, m2s):
    """Drop slot ``s``; only rows that ranked it first or second are rescanned.

    ``active`` lists the occupied slots after the deletion.
    """
    slot_center[s] = -1
    for i in prange(mv.shape[0]):
        if ms[i] == s or m2s[i] == s:
            _recompute_row(i, dist, active, slot_center, mv, ms, m2v, m2s)


def query(Q, j, min_val, tmp):
    for i in prange(Q.shape[0]):
        v = _sq(Q, i, j)
        tmp[i] = v if v < min_val[i] else min_val[i]
    return _pairwise_sum(tmp)


def best_swap(Q, a, slots, incumbent, mv, ms, m2v, tmp):
    """Estimate delete(b), query(a), insert(b) for every center in ``slots`` order.

    With ``b`` removed a point's nearest distance is its runner-up whenever
    ``b`` held the minimum, so each estimate is one pass over the points and
    nothing is modified.  Returns ``(slot, best)`` for the lowest estimate
    strictly below ``incumbent`` (``slot = -1`` if none).
    """
    n = Q.shape[0]
    best = incumbent
    q = -1
    for r in range(slots.shape[0]):
        s = slots[r]
        for i in prange(n):
            rest = m2v[i] if ms[i] == s else mv[i]
            v = _sq(Q, i, a)
            tmp[i] = v if v < rest else rest
        cand = _pairwise_sum(tmp)
        if cand < best:
            best = cand
            q = s
    return q, best


def min_sq_dists(X, centers, out):
    """Exact distance from every point to its nearest center, from scratch."""
    for i in prange(X.shape[0]):
        best = np.inf
        for c in range(centers.shape[0]):
            v = _sq(X, i, centers[c])
            if v < best:
                best = v
        out[i] = best


def distance_matrix(X, centers, D):
    for i in prange(X.shape[0]):
        for c in range(centers.shape[0]):
            D[i, c] = _sq(X, i, centers[c])


def exact_best_swap(X, a, D, incumbent, tmp):
    """Swap evaluation for the baseline from a freshly computed ``D`` (n x k).

    Column ``c`` of ``D`` belongs to the ``c``-th center in scan order; the
    return value is the winning column (-1 if none) and its cost.
    """
    n, k = D.shape
    da = np.empty(n)
    for i in prange(n):
        da[i] = _sq(X, i, a)
    best = incumbent
    q = -1
    for b in range(k):
        for i in prange(n):
            v = da[i]
            for c in range(k):
                if c != b and D[i, c] < v:
                    v = D[i, c]
            tmp[i] = v
        cand = _pairwise_sum(tmp)
        if cand < best:
            best = cand
            q = b
    return q, best


_FUNCS = {
    "pair_sq_dist": pair_sq_dist,
    "insert_slot": insert_slot,
    "delete_slot": delete_slot,
    "query": query,
    "best_swap": best_swap,
    "min_sq_dists": min_sq_dists,
    "distance_matrix": distance_matrix,
    "exact_best_swap": exact_best_swap,
}


def _build(parallel: bool) -> SimpleNamespace:
    opts = {"parallel": True} if parallel else {"cache": True}
    ns = SimpleNamespace(**{name: njit(**opts)(fn) for name, fn in _FUNCS.items()})
    ns.pairwise_sum = _pairwise_sum
    ns.parallel = parallel
    return ns


SERIAL = _build(False)
_parallel = None


def thread_cap() -> int:
    """Inner-loop thread cap from ``SKETCHSEED_THREADS`` (default 1)."""
    raw = os.environ.get("SKETCHSEED_THREADS", "").strip()
    if not raw:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"SKETCHSEED_THREADS must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"SKETCHSEED_THREADS must be a positive integer, got {raw!r}")
    return cap


def kernels() -> SimpleNamespace:
    """Kernel set honoring ``SKETCHSEED_THREADS``."""
    global _parallel
    cap = min(thread_cap(), numba.config.NUMBA_NUM_THREADS)
    if cap <= 1:
        return SERIAL
    if _parallel is None:
        _parallel = _build(True)
    numba.set_num_threads(cap)
    return _parallel
