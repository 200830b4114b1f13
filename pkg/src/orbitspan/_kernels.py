"""Compiled inner loops for covering workloads."""
from __future__ import annotations

import numpy as np
from numba import njit

BOWEN, MAXMEAN, MEAN = 0, 1, 2


@njit(cache=True)
def _step_dist(orbits, i, j, m, weights):
    s = 0.0
    for c in range(weights.shape[0]):
        d = abs(orbits[i, m, c] - orbits[j, m, c])
        if d > 0.5:
            d = 1.0 - d
        s += weights[c] * d
    return s


@njit(cache=True)
def pairwise_profiles(orbits, weights, horizons, bowen, maxmean, mean):
    """Fill ``(L, P, P)`` matrices for the sorted horizons in one pass per pair.

    ``orbits`` has shape ``(P, n_max, dim)``; a matrix argument of shape
    ``(0, 0, 0)`` is skipped.
    """
    P = orbits.shape[0]
    L = horizons.shape[0]
    n_max = horizons[L - 1]
    want_b = bowen.shape[0] > 0
    want_h = maxmean.shape[0] > 0
    want_m = mean.shape[0] > 0
    for i in range(P):
        for j in range(i + 1, P):
            mx = 0.0
            sm = 0.0
            mm = 0.0
            ptr = 0
            for m in range(n_max):
                d = _step_dist(orbits, i, j, m, weights)
                if d > mx:
                    mx = d
                sm += d
                av = sm / (m + 1)
                if av > mx:
                    av = mx
                if av > mm:
                    mm = av
                while ptr < L and horizons[ptr] == m + 1:
                    if want_b:
                        bowen[ptr, i, j] = mx
                        bowen[ptr, j, i] = mx
                    if want_h:
                        maxmean[ptr, i, j] = mm
                        maxmean[ptr, j, i] = mm
                    if want_m:
                        mean[ptr, i, j] = av
                        mean[ptr, j, i] = av
                    ptr += 1


@njit(cache=True)
def _exit_times(orbits, i, j, weights, eps_list, n_max, kind, out):
    """First horizon at which the pair leaves each eps-ball (n_max + 1 if never).

    ``eps_list`` is ascending; one pass over the step distances serves all radii.
    """
    R = eps_list.shape[0]
    for r in range(R):
        out[r] = n_max + 1
    mx = 0.0
    sm = 0.0
    lo = 0  # radii below lo have exited
    for m in range(n_max):
        d = _step_dist(orbits, i, j, m, weights)
        if kind == BOWEN:
            v = d
        else:
            sm += d
            if d > mx:
                mx = d
            v = sm / (m + 1)
            if v > mx:
                v = mx
        while lo < R and v >= eps_list[lo]:
            out[lo] = m + 1
            lo += 1
        if lo == R:
            return


@njit(cache=True)
def _exit_times_1d(orb, i, j, weight, eps_list, n_max, kind, taus, w):
    """``_exit_times`` for one circle coordinate, written straight into ``taus[w]``."""
    R = eps_list.shape[0]
    lo = 0
    mx = 0.0
    sm = 0.0
    m = 0
    while m < n_max and lo < R:
        d = abs(orb[i, m] - orb[j, m])
        if d > 0.5:
            d = 1.0 - d
        d *= weight
        if kind == BOWEN:
            v = d
        else:
            sm += d
            if d > mx:
                mx = d
            v = sm / (m + 1)
            if v > mx:
                v = mx
        while lo < R and v >= eps_list[lo]:
            taus[w, lo] = m + 1
            lo += 1
        m += 1
    while lo < R:
        taus[w, lo] = n_max + 1
        lo += 1


@njit(cache=True)
def _wrap_pos(p, P):
    return p - P if p >= P else p


@njit(cache=True)
def _grow(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty(max(need, 2 * a.shape[0]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def window_runs(orbits, weights, order, base_x, eps_list, horizons, kind):
    """Ball runs for a sorted circle sample, pruned by the initial distance.

    Bowen and max-mean balls at any horizon sit inside the base ball, which
    is a circular window of the sorted sample, and shrink as the horizon
    grows.  For every (horizon, radius) cell and every centre, returns runs
    of sorted positions inside the ball.

    Output: ``ptr`` of shape ``(H, R, P + 1)`` indexing into the cell's
    slice ``offs[cell]:offs[cell + 1]`` of the flat ``start``/``length``.
    ``eps_list`` must be ascending.  ``orbits`` is indexed by sorted
    position; ``order[pos]`` is the original index at position ``pos`` and
    centres ``c`` are original indices.
    """
    P = order.shape[0]
    H = horizons.shape[0]
    R = eps_list.shape[0]
    n_max = horizons[H - 1]
    pos_of = np.empty(P, dtype=np.int64)
    for p in range(P):
        pos_of[order[p]] = p
    ptr = np.zeros((H, R, P + 1), dtype=np.int64)
    cell_start = [np.empty(16, dtype=np.int64) for _ in range(H * R)]
    cell_len = [np.empty(16, dtype=np.int64) for _ in range(H * R)]
    cell_used = np.zeros(H * R, dtype=np.int64)
    taus = np.empty((P, R), dtype=np.int64)
    cand = np.empty((R, P), dtype=np.int64)
    ncand = np.zeros(R, dtype=np.int64)
    tmp = np.empty(R, dtype=np.int64)
    one_d = orbits.shape[2] == 1
    orb = orbits[:, :, 0]
    eps_max = eps_list[R - 1]
    reach = eps_max / weights[0] * (1.0 + 1e-9) + 1e-12
    sb = np.empty(P)
    for p in range(P):
        sb[p] = base_x[order[p]]
    for c in range(P):
        pc = pos_of[c]
        # window superset from the sorted base values; exact membership comes from taus
        x0 = sb[pc]
        lo_val = x0 - reach
        hi_val = x0 + reach
        if 2 * reach >= 1.0:
            left, right = 0, P - 1
        else:
            if lo_val >= 0.0:
                left = pc - np.searchsorted(sb, lo_val, side="right")
            else:
                left = pc + P - np.searchsorted(sb, lo_val + 1.0, side="right")
            if hi_val <= 1.0:
                right = np.searchsorted(sb, hi_val, side="left") - 1 - pc
            else:
                right = P - 1 - pc + np.searchsorted(sb, hi_val - 1.0, side="left")
            if left + right + 1 > P:
                left, right = 0, P - 1
        W = left + right + 1
        base = pc - left
        if base < 0:
            base += P
        for r in range(R):
            ncand[r] = 0
        for w in range(W):
            if one_d:
                q = base + w
                if q >= P:
                    q -= P
                _exit_times_1d(orb, pc, q, weights[0], eps_list, n_max, kind,
                               taus, w)
            else:
                _exit_times(orbits, pc, (pc - left + w) % P, weights, eps_list, n_max, kind, tmp)
                for r in range(R):
                    taus[w, r] = tmp[r]
            for r in range(R):
                if taus[w, r] > 1:
                    cand[r, ncand[r]] = w
                    ncand[r] += 1
        for r in range(R):
            nc = ncand[r]
            for h in range(H):
                n = horizons[h]
                cell = h * R + r
                kept = 0
                rs = -1
                prev = -2
                for t in range(nc):
                    w = cand[r, t]
                    if taus[w, r] <= n:
                        continue
                    cand[r, kept] = w
                    kept += 1
                    p_abs = base + w
                    if p_abs >= P:
                        p_abs -= P
                    if rs >= 0 and (w != prev + 1 or p_abs == 0):
                        k = cell_used[cell]
                        cell_start[cell] = _grow(cell_start[cell], k + 1)
                        cell_len[cell] = _grow(cell_len[cell], k + 1)
                        cell_start[cell][k] = rs
                        cell_len[cell][k] = _wrap_pos(base + prev, P) + 1 - rs
                        cell_used[cell] = k + 1
                        rs = -1
                    if rs < 0:
                        rs = p_abs
                    prev = w
                if rs >= 0:
                    k = cell_used[cell]
                    cell_start[cell] = _grow(cell_start[cell], k + 1)
                    cell_len[cell] = _grow(cell_len[cell], k + 1)
                    cell_start[cell][k] = rs
                    cell_len[cell][k] = _wrap_pos(base + prev, P) + 1 - rs
                    cell_used[cell] = k + 1
                nc = kept
                ptr[h, r, c + 1] = cell_used[cell]
    total = 0
    for cell in range(H * R):
        total += cell_used[cell]
    start = np.empty(total, dtype=np.int64)
    length = np.empty(total, dtype=np.int64)
    offs = np.zeros(H * R + 1, dtype=np.int64)
    for cell in range(H * R):
        k = cell_used[cell]
        offs[cell + 1] = offs[cell] + k
        start[offs[cell]: offs[cell] + k] = cell_start[cell][:k]
        length[offs[cell]: offs[cell] + k] = cell_len[cell][:k]
    return ptr, start, length, offs


# ---- Fenwick tree over "still uncovered" flags --------------------------------------


@njit(cache=True)
def _fen_add(tree, i, v):
    i += 1
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += v
        i += i & (-i)


@njit(cache=True)
def _fen_prefix(tree, i):
    s = 0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def _heap_push(heap, size, key):
    i = size
    heap[i] = key
    while i > 0:
        p = (i - 1) // 2
        if heap[p] <= heap[i]:
            break
        heap[p], heap[i] = heap[i], heap[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        s = i
        if l < size and heap[l] < heap[s]:
            s = l
        if r < size and heap[r] < heap[s]:
            s = r
        if s == i:
            break
        heap[s], heap[i] = heap[i], heap[s]
        i = s
    return top, size


@njit(cache=True)
def lazy_greedy(ptr, start, length, P, target):
    """Greedy max-residual-coverage cover; ties go to the lowest centre index.

    Runs of centre c are ``start[ptr[c]:ptr[c+1]]`` (positions) with lengths.
    Stops once more than ``target`` positions are covered.
    Returns ``(centres, covered_count)``.
    """
    tree = np.zeros(P + 1, dtype=np.int64)
    for i in range(P):
        _fen_add(tree, i, 1)
    covered = np.zeros(P, dtype=np.bool_)
    heap = np.empty(P + 1, dtype=np.int64)
    size = 0
    for c in range(P):
        g = 0
        for k in range(ptr[c], ptr[c + 1]):
            g += length[k]
        size = _heap_push(heap, size, (P - g) * P + c)
    centres = np.empty(P, dtype=np.int64)
    nc = 0
    count = 0
    while count <= target and size > 0:
        key, size = _heap_pop(heap, size)
        c = key % P
        g_old = P - key // P
        g = 0
        for k in range(ptr[c], ptr[c + 1]):
            a = start[k]
            g += _fen_prefix(tree, a + length[k]) - _fen_prefix(tree, a)
        if g == 0:
            continue
        if g < g_old:
            size = _heap_push(heap, size, (P - g) * P + c)
            continue
        centres[nc] = c
        nc += 1
        for k in range(ptr[c], ptr[c + 1]):
            for p in range(start[k], start[k] + length[k]):
                if not covered[p]:
                    covered[p] = True
                    _fen_add(tree, p, -1)
                    count += 1
    return centres[:nc], count


@njit(cache=True)
def greedy_packing(ptr, start, length, pos_of, P):
    """Scan centres in index order, keeping those not inside an earlier kept ball."""
    blocked = np.zeros(P, dtype=np.bool_)
    kept = 0
    for c in range(P):
        if blocked[pos_of[c]]:
            continue
        kept += 1
        for k in range(ptr[c], ptr[c + 1]):
            for p in range(start[k], start[k] + length[k]):
                blocked[p] = True
    return kept


@njit(cache=True)
def dense_runs(adj):
    """Runs of True along each row of a boolean matrix (positions = column indices)."""
    P = adj.shape[0]
    ncol = adj.shape[1]
    ptr = np.zeros(P + 1, dtype=np.int64)
    total = 0
    for i in range(P):
        prev = False
        for j in range(ncol):
            if adj[i, j] and not prev:
                total += 1
            prev = adj[i, j]
        ptr[i + 1] = total
    start = np.empty(total, dtype=np.int64)
    length = np.empty(total, dtype=np.int64)
    k = 0
    for i in range(P):
        j = 0
        while j < ncol:
            if adj[i, j]:
                s = j
                while j < ncol and adj[i, j]:
                    j += 1
                start[k] = s
                length[k] = j - s
                k += 1
            else:
                j += 1
    return ptr, start, length
