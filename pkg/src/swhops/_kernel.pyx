# cython: language_level=3
"""Compiled simulation kernel: bulk trials of delta-greedy forwarding.

Draw-for-draw and float-for-float identical to _kernel_py: the same
counter-based PRF, the same squared-distance filters written in the same
expression shapes (the build disables FP contraction so no fused
multiply-adds sneak in), the same clamped pick arithmetic, and a stable
counting sort reproducing numpy's stable argsort grid order.
"""

from libc.math cimport INFINITY, M_PI, ceil, cos, sin, sqrt

import numpy as np

ctypedef unsigned long long u64

cdef enum:
    LRC_ATTEMPTS = 64


cdef inline u64 _prf(u64 seed, u64 ctr) noexcept nogil:
    cdef u64 z = seed + (ctr + 1) * <u64>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _u01(u64 seed, u64 ctr) noexcept nogil:
    return <double>(_prf(seed, ctr) >> 11) * (1.0 / 9007199254740992.0)


cdef inline u64 _stream(u64 parent, u64 ix) noexcept nogil:
    cdef u64 h = parent + <u64>0x9E3779B97F4A7C15 + ix * <u64>0xD1B54A32D192ED03
    h = (h ^ (h >> 30)) * <u64>0xBF58476D1CE4E5B9
    h = (h ^ (h >> 27)) * <u64>0x94D049BB133111EB
    return h ^ (h >> 31)


cdef void _place(u64 seed_p, double R, long n, double* xs, double* ys) noexcept nogil:
    cdef long j
    for j in range(n):
        xs[j] = _u01(seed_p, 1 + 2 * j) * R
        ys[j] = _u01(seed_p, 2 + 2 * j) * R


cdef void _build_grid(double* xs, double* ys, long n, double r, long ncx,
                      long* cellof, long* order, long* start, long* cursor) noexcept nogil:
    cdef long j, c, cx, cy
    cdef long ncells = ncx * ncx
    for c in range(ncells + 1):
        start[c] = 0
    for j in range(n):
        cx = <long>(xs[j] / r)
        if cx > ncx - 1:
            cx = ncx - 1
        cy = <long>(ys[j] / r)
        if cy > ncx - 1:
            cy = ncx - 1
        c = cy * ncx + cx
        cellof[j] = c
        start[c + 1] += 1
    for c in range(ncells):
        start[c + 1] += start[c]
        cursor[c] = start[c]
    for j in range(n):
        c = cellof[j]
        order[cursor[c]] = j
        cursor[c] += 1


cdef long _draw_lrc(u64 seed, long node_id, double px, double py,
                    double* xs, double* ys, long n, double r2) noexcept nogil:
    """Relay id 1..n, or -1 when no relay lies outside B(node, r)."""
    cdef long self_idx = node_id - 1
    cdef long a, idx, count, pick, seen
    cdef double u, dx, dy
    for a in range(LRC_ATTEMPTS):
        u = _u01(seed, a)
        idx = <long>(u * n)
        if idx > n - 1:
            idx = n - 1
        if idx == self_idx:
            continue
        dx = xs[idx] - px
        dy = ys[idx] - py
        if dx * dx + dy * dy >= r2:
            return idx + 1
    count = 0
    for idx in range(n):
        if idx == self_idx:
            continue
        dx = xs[idx] - px
        dy = ys[idx] - py
        if dx * dx + dy * dy >= r2:
            count += 1
    if count == 0:
        return -1
    u = _u01(seed, LRC_ATTEMPTS)
    pick = <long>(u * count)
    if pick > count - 1:
        pick = count - 1
    seen = 0
    for idx in range(n):
        if idx == self_idx:
            continue
        dx = xs[idx] - px
        dy = ys[idx] - py
        if dx * dx + dy * dy >= r2:
            if seen == pick:
                return idx + 1
            seen += 1
    return -1


cdef double _route_one(u64 trial_seed, double R, double r, double delta, long n,
                       double d, bint lrc_enabled, bint tie_uniform,
                       double* xs, double* ys, long* cellof, long* order,
                       long* start, long* cursor, long ncx,
                       long* cand, double* cand_dt2, long* lrc_cache,
                       signed char* visited,
                       long* trail_to, signed char* trail_kind, double* trail_dist,
                       long* trail_len,
                       unsigned char* viol, signed char* ok) noexcept nogil:
    cdef u64 seed_p, seed_route, seed_lrc_parent
    cdef double tx, ty, theta, sx, sy, px, py, dcur, r2
    cdef double u, kr, kr2, thr, thr2, dx, dy, dl2, dt2, sel_dt2, ld2, to_dist
    cdef long i, k, csize, sel, cpick, self_idx, to_id, lc
    cdef long ccx, ccy, gx, gy, gx0, gx1, gy0, gy1, base, c, ii, idx
    cdef long current, hops, cap
    cdef int kindc
    cdef bint take

    viol[0] = 0
    ok[0] = 0
    if trail_len != NULL:
        trail_len[0] = 0
    if d == 0.0:
        ok[0] = 1
        return 0.0

    seed_p = _stream(trial_seed, 1)           # placement stream
    seed_lrc_parent = _stream(trial_seed, 2)  # per-node contact streams
    seed_route = _stream(trial_seed, 3)       # one draw per forwarding decision

    tx = R / 2.0
    ty = R / 2.0
    theta = 2.0 * M_PI * _u01(seed_p, 0)
    sx = tx + d * cos(theta)
    sy = ty + d * sin(theta)
    _place(seed_p, R, n, xs, ys)
    _build_grid(xs, ys, n, r, ncx, cellof, order, start, cursor)
    for i in range(n + 1):
        lrc_cache[i] = -2
        visited[i] = 0
    visited[0] = 1

    r2 = r * r
    current = 0
    px = sx
    py = sy
    dcur = d
    hops = 0
    cap = n + 1
    while True:
        u = _u01(seed_route, hops)
        if dcur < r:
            hops += 1
            if trail_len != NULL:
                trail_to[trail_len[0]] = -1
                trail_kind[trail_len[0]] = 2
                trail_dist[trail_len[0]] = 0.0
                trail_len[0] += 1
            ok[0] = 1
            return <double>hops
        k = <long>(dcur / r)
        kr = k * r
        kr2 = kr * kr
        thr = dcur - (r - delta)
        thr2 = thr * thr
        self_idx = current - 1
        ccx = <long>(px / r)
        if ccx > ncx - 1:
            ccx = ncx - 1
        ccy = <long>(py / r)
        if ccy > ncx - 1:
            ccy = ncx - 1
        gy0 = ccy - 1 if ccy > 0 else 0
        gy1 = ccy + 2 if ccy + 2 < ncx else ncx
        gx0 = ccx - 1 if ccx > 0 else 0
        gx1 = ccx + 2 if ccx + 2 < ncx else ncx
        csize = 0
        for gy in range(gy0, gy1):
            base = gy * ncx
            for gx in range(gx0, gx1):
                c = base + gx
                for ii in range(start[c], start[c + 1]):
                    idx = order[ii]
                    if idx == self_idx:
                        continue
                    dx = xs[idx] - px
                    dy = ys[idx] - py
                    if dx * dx + dy * dy >= r2:
                        continue
                    dx = xs[idx] - tx
                    dy = ys[idx] - ty
                    dt2 = dx * dx + dy * dy
                    if dt2 < kr2 and dt2 <= thr2:
                        cand[csize] = idx
                        cand_dt2[csize] = dt2
                        csize += 1
        sel = -1
        sel_dt2 = 0.0
        if csize > 0:
            if tie_uniform:
                cpick = <long>(u * csize)
                if cpick > csize - 1:
                    cpick = csize - 1
            else:
                cpick = 0
                for ii in range(1, csize):
                    if cand_dt2[ii] < cand_dt2[cpick]:
                        cpick = ii
            sel = cand[cpick]
            sel_dt2 = cand_dt2[cpick]
        to_id = -2
        kindc = -1
        to_dist = 0.0
        if lrc_enabled:
            lc = lrc_cache[current]
            if lc == -2:
                lc = _draw_lrc(_stream(seed_lrc_parent, current), current,
                               px, py, xs, ys, n, r2)
                lrc_cache[current] = lc
            if lc >= 1:
                dx = xs[lc - 1] - tx
                dy = ys[lc - 1] - ty
                ld2 = dx * dx + dy * dy
                take = (ld2 < sel_dt2) if sel >= 0 else (ld2 <= thr2)
                if take:
                    to_id = lc
                    kindc = 1
                    to_dist = sqrt(ld2)
        if to_id == -2 and sel >= 0:
            to_id = sel + 1
            kindc = 0
            to_dist = sqrt(sel_dt2)
        if to_id == -2:
            return INFINITY
        if to_dist >= dcur:
            viol[0] |= 1
            return INFINITY
        hops += 1
        if trail_len != NULL:
            trail_to[trail_len[0]] = to_id
            trail_kind[trail_len[0]] = <signed char>kindc
            trail_dist[trail_len[0]] = to_dist
            trail_len[0] += 1
        if visited[to_id]:
            viol[0] |= 2
            return INFINITY
        visited[to_id] = 1
        if hops > cap:
            viol[0] |= 4
            return INFINITY
        current = to_id
        px = xs[to_id - 1]
        py = ys[to_id - 1]
        dcur = to_dist


def run_trials(double R, double r, double delta, long n, double d,
               bint lrc_enabled, bint tie_uniform,
               u64[::1] trial_seeds, double[::1] tau_out,
               unsigned char[::1] delivered_out, unsigned char[::1] viol_out):
    cdef long T = trial_seeds.shape[0]
    if T == 0:
        return
    cdef long ncx = <long>ceil(R / r)
    cdef double[::1] xs = np.empty(n, dtype=np.float64)
    cdef double[::1] ys = np.empty(n, dtype=np.float64)
    cdef long[::1] cellof = np.empty(n, dtype=np.int64)
    cdef long[::1] order = np.empty(n, dtype=np.int64)
    cdef long[::1] start = np.empty(ncx * ncx + 1, dtype=np.int64)
    cdef long[::1] cursor = np.empty(ncx * ncx, dtype=np.int64)
    cdef long[::1] cand = np.empty(n, dtype=np.int64)
    cdef double[::1] cand_dt2 = np.empty(n, dtype=np.float64)
    cdef long[::1] lrc_cache = np.empty(n + 1, dtype=np.int64)
    cdef signed char[::1] visited = np.empty(n + 1, dtype=np.int8)
    cdef unsigned char viol
    cdef signed char ok
    cdef long t
    with nogil:
        for t in range(T):
            tau_out[t] = _route_one(
                trial_seeds[t], R, r, delta, n, d, lrc_enabled, tie_uniform,
                &xs[0], &ys[0], &cellof[0], &order[0], &start[0], &cursor[0],
                ncx, &cand[0], &cand_dt2[0], &lrc_cache[0], &visited[0],
                NULL, NULL, NULL, NULL, &viol, &ok)
            delivered_out[t] = <unsigned char>ok
            viol_out[t] = viol


def route_single(double R, double r, double delta, long n, double d,
                 bint lrc_enabled, bint tie_uniform, u64 trial_seed):
    cdef long ncx = <long>ceil(R / r)
    cdef double[::1] xs = np.empty(n, dtype=np.float64)
    cdef double[::1] ys = np.empty(n, dtype=np.float64)
    cdef long[::1] cellof = np.empty(n, dtype=np.int64)
    cdef long[::1] order = np.empty(n, dtype=np.int64)
    cdef long[::1] start = np.empty(ncx * ncx + 1, dtype=np.int64)
    cdef long[::1] cursor = np.empty(ncx * ncx, dtype=np.int64)
    cdef long[::1] cand = np.empty(n, dtype=np.int64)
    cdef double[::1] cand_dt2 = np.empty(n, dtype=np.float64)
    cdef long[::1] lrc_cache = np.empty(n + 1, dtype=np.int64)
    cdef signed char[::1] visited = np.empty(n + 1, dtype=np.int8)
    cdef long[::1] trail_to = np.empty(n + 2, dtype=np.int64)
    cdef signed char[::1] trail_kind = np.empty(n + 2, dtype=np.int8)
    cdef double[::1] trail_dist = np.empty(n + 2, dtype=np.float64)
    cdef long trail_len = 0
    cdef unsigned char viol
    cdef signed char ok
    cdef double tau = _route_one(
        trial_seed, R, r, delta, n, d, lrc_enabled, tie_uniform,
        &xs[0], &ys[0], &cellof[0], &order[0], &start[0], &cursor[0],
        ncx, &cand[0], &cand_dt2[0], &lrc_cache[0], &visited[0],
        &trail_to[0], &trail_kind[0], &trail_dist[0], &trail_len,
        &viol, &ok)
    trail = [
        (int(trail_to[i]), int(trail_kind[i]), float(trail_dist[i]))
        for i in range(trail_len)
    ]
    return float(tau), bool(ok), int(viol), trail
