"""Pure-Python simulation kernel: bulk trials of delta-greedy forwarding.

Mirrors the compiled kernel draw for draw and float for float: the same
counter-based streams (rng.py), the same squared-distance filters, the same
pick arithmetic.  numpy handles placement, the grid index and per-hop
candidate gathering; the hop loop itself is scalar Python, so this backend is
the slow but always-available reference implementation.

Long-range contacts are materialized lazily: a node's contact is drawn the
first time that node holds the message.  Because draws are addressed by
(trial seed, node id, counter) rather than consumed from shared state, lazy
and eager assignment produce identical contacts.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import TAG_LRC, TAG_PLACE, TAG_ROUTE, stream_seed, u01, u01_block

KIND_LOCAL = 0
KIND_LONG_RANGE = 1
KIND_DIRECT = 2

VIOL_NONSTRICT = 1
VIOL_REVISIT = 2
VIOL_CAP = 4

_LRC_ATTEMPTS = 64


def _build_trial(R: float, r: float, n: int, d: float, trial_seed: int):
    """Placement and grid index for one trial, from its placement stream."""
    seed_p = stream_seed(trial_seed, TAG_PLACE)
    tx = R / 2
    ty = R / 2
    theta = 2.0 * math.pi * u01(seed_p, 0)
    sx = tx + d * math.cos(theta)
    sy = ty + d * math.sin(theta)
    coords = u01_block(seed_p, 1, 2 * n)
    xs = coords[0::2] * R
    ys = coords[1::2] * R
    ncx = int(math.ceil(R / r))
    cx = np.minimum((xs / r).astype(np.int64), ncx - 1)
    cy = np.minimum((ys / r).astype(np.int64), ncx - 1)
    cells = cy * ncx + cx
    order = np.argsort(cells, kind="stable").astype(np.int64)
    start = np.zeros(ncx * ncx + 1, dtype=np.int64)
    np.cumsum(np.bincount(cells, minlength=ncx * ncx), out=start[1:])
    return tx, ty, sx, sy, xs, ys, ncx, order, start


def _draw_lrc(trial_seed: int, node_id: int, px: float, py: float,
              xs: np.ndarray, ys: np.ndarray, n: int, r2: float) -> int:
    """One node's long-range contact: uniform over relays outside B(node, r),
    excluding itself.  Rejection sampling with an exhaustive fallback; -1
    when no relay qualifies."""
    seed = stream_seed(trial_seed, TAG_LRC, node_id)
    self_idx = node_id - 1  # 0-based relay index, -1 for the source
    for a in range(_LRC_ATTEMPTS):
        u = u01(seed, a)
        idx = min(int(u * n), n - 1)
        if idx == self_idx:
            continue
        dx = xs[idx] - px
        dy = ys[idx] - py
        if dx * dx + dy * dy >= r2:
            return idx + 1
    dxa = xs - px
    dya = ys - py
    mask = dxa * dxa + dya * dya >= r2
    if self_idx >= 0:
        mask[self_idx] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        return -1
    u = u01(seed, _LRC_ATTEMPTS)
    pick = min(int(u * candidates.size), candidates.size - 1)
    return int(candidates[pick]) + 1


def _route_trial(R: float, r: float, delta: float, n: int, d: float,
                 lrc_enabled: bool, tie_uniform: bool, trial_seed: int,
                 record_hops: bool = False):
    """One full trial: build the instance, forward until delivery or stall.

    Returns (tau, delivered, viol, trail); trail is a list of
    (to_id, kind, to_dist) when record_hops else None, with to_id = -1 for
    the target and relay ids 1..n otherwise.
    """
    trail = [] if record_hops else None
    if d == 0.0:
        return 0.0, 1, 0, trail
    tx, ty, sx, sy, xs, ys, ncx, order, start = _build_trial(R, r, n, d, trial_seed)
    seed_route = stream_seed(trial_seed, TAG_ROUTE)
    lrc_cache = np.full(n + 1, -2, dtype=np.int64)  # -2 unset, -1 none
    visited = np.zeros(n + 1, dtype=bool)
    visited[0] = True
    r2 = r * r
    current = 0  # node id: 0 source, 1..n relays
    px, py = sx, sy
    dcur = d
    hops = 0
    viol = 0
    cap = n + 1
    while True:
        u = u01(seed_route, hops)  # exactly one draw per forwarding decision
        if dcur < r:
            hops += 1
            if record_hops:
                trail.append((-1, KIND_DIRECT, 0.0))
            return float(hops), 1, viol, trail
        k = int(dcur / r)
        kr = k * r
        kr2 = kr * kr
        thr = dcur - (r - delta)
        thr2 = thr * thr
        ccx = min(int(px / r), ncx - 1)
        ccy = min(int(py / r), ncx - 1)
        segs = []
        for gy in range(max(0, ccy - 1), min(ncx, ccy + 2)):
            base = gy * ncx
            for gx in range(max(0, ccx - 1), min(ncx, ccx + 2)):
                c = base + gx
                lo, hi = start[c], start[c + 1]
                if hi > lo:
                    segs.append(order[lo:hi])
        sel = -1
        sel_dt2 = 0.0
        if segs:
            ids = segs[0] if len(segs) == 1 else np.concatenate(segs)
            dxv = xs[ids] - px
            dyv = ys[ids] - py
            dl2 = dxv * dxv + dyv * dyv
            dxt = xs[ids] - tx
            dyt = ys[ids] - ty
            dt2 = dxt * dxt + dyt * dyt
            qual = (dl2 < r2) & (dt2 < kr2) & (dt2 <= thr2)
            if current > 0:
                qual &= ids != current - 1
            qi = np.flatnonzero(qual)
            csize = int(qi.size)
            if csize:
                if tie_uniform:
                    c = min(int(u * csize), csize - 1)
                else:
                    c = int(np.argmin(dt2[qi]))  # first minimum, scan order
                sel = int(ids[qi[c]])
                sel_dt2 = float(dt2[qi[c]])
        to_id = -2
        kind = -1
        to_dist = 0.0
        if lrc_enabled:
            lc = int(lrc_cache[current])
            if lc == -2:
                lc = _draw_lrc(trial_seed, current, px, py, xs, ys, n, r2)
                lrc_cache[current] = lc
            if lc >= 1:
                dx = float(xs[lc - 1]) - tx
                dy = float(ys[lc - 1]) - ty
                ld2 = dx * dx + dy * dy
                take = ld2 < sel_dt2 if sel >= 0 else ld2 <= thr2
                if take:
                    to_id = lc
                    kind = KIND_LONG_RANGE
                    to_dist = math.sqrt(ld2)
        if to_id == -2 and sel >= 0:
            to_id = sel + 1
            kind = KIND_LOCAL
            to_dist = math.sqrt(sel_dt2)
        if to_id == -2:
            return math.inf, 0, viol, trail
        if to_dist >= dcur:
            viol |= VIOL_NONSTRICT
            return math.inf, 0, viol, trail
        hops += 1
        if record_hops:
            trail.append((to_id, kind, to_dist))
        if visited[to_id]:
            viol |= VIOL_REVISIT
            return math.inf, 0, viol, trail
        visited[to_id] = True
        if hops > cap:
            viol |= VIOL_CAP
            return math.inf, 0, viol, trail
        current = to_id
        px = float(xs[to_id - 1])
        py = float(ys[to_id - 1])
        dcur = to_dist


def run_trials(R, r, delta, n, d, lrc_enabled, tie_uniform,
               trial_seeds, tau_out, delivered_out, viol_out):
    for t in range(trial_seeds.shape[0]):
        tau, ok, viol, _ = _route_trial(
            R, r, delta, n, d, lrc_enabled, tie_uniform, int(trial_seeds[t])
        )
        tau_out[t] = tau
        delivered_out[t] = ok
        viol_out[t] = viol


def route_single(R, r, delta, n, d, lrc_enabled, tie_uniform, trial_seed):
    tau, ok, viol, trail = _route_trial(
        R, r, delta, n, d, lrc_enabled, tie_uniform, int(trial_seed), record_hops=True
    )
    return tau, bool(ok), int(viol), trail
