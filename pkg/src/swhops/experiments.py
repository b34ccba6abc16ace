"""Monte Carlo harness: trial aggregation, separation sweeps, convergence
studies, tail probabilities and contact-distribution validation.

Every experiment is a pure function of its spec and the master seed.  Trial
seeds are derived as stream_seed(cell seed, TAG_TRIAL, trial index), cell
seeds as stream_seed(master seed, TAG_CELL, cell ordinal); results are
therefore reproducible byte for byte and independent of chunking and thread
count (see rng.py).

Two delivery-time estimators are reported side by side: mean_delivered is the
average of tau over delivered trials (what a delivery-time plot shows), and
mean_indicator is the average of tau over all trials with failures counting
zero (the indicator-weighted expectation whose large-n limit the theory
pins).  At high density they coincide; at low density the difference makes
routing failures visible instead of hiding them.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import kernel
from .analytic import DeliveryCurve, delivery_table, g_of_d
from .errors import InvariantViolation, ValidationError
from .geometry import Domain, Point, region_area_minus_ball
from .network import NetworkConfig, max_separation
from .rng import (
    TAG_CELL,
    TAG_LRC,
    TAG_PLACE,
    TAG_TRIAL,
    stream_seed,
    stream_seed_block,
    u01,
    u01_block,
)
from .routing import TieBreak, delivery_bound

CSV_HEADER = (
    "d,d_over_r,n,trials,mean_delivered,mean_indicator,"
    "std_delivered,fail_rate,analytic_g,abs_error"
)

_LRC_ATTEMPTS = 64


@dataclass(frozen=True)
class SummaryRow:
    d: float
    d_over_r: float
    n: int
    trials: int
    mean_delivered: float  # mean tau over delivered trials (0 when none)
    mean_indicator: float  # mean of tau * 1{delivered} over all trials
    std_delivered: float  # population std over delivered trials
    fail_rate: float
    analytic_g: float
    abs_error: float  # |mean_delivered - analytic_g|


@dataclass(frozen=True)
class SweepSpec:
    config: NetworkConfig  # template; n and seed are overridden per cell
    d_grid: tuple
    trials: int
    n_list: tuple  # empty means analytic-only

    def __post_init__(self):
        limit = max_separation(self.config)
        for d in self.d_grid:
            if not (0.0 <= d <= limit):
                raise ValidationError(
                    f"sweep separation d={d} outside [0, R/2 - r = {limit}]"
                )
        for n in self.n_list:
            if n < 1:
                raise ValidationError(f"sweep n values must be >= 1, got {n}")
        if self.n_list and self.trials < 1:
            raise ValidationError("need trials >= 1 for simulation cells")


@dataclass(frozen=True)
class RegionCheck:
    rect: tuple
    observed: float
    predicted: float
    z: float
    hits: int


def trial_seed_block(cell_seed: int, trials: int) -> np.ndarray:
    """Seeds for trials 0..trials-1 of a cell, vectorized but identical to
    stream_seed(cell_seed, TAG_TRIAL, t)."""
    parent = stream_seed(cell_seed, TAG_TRIAL)
    return stream_seed_block(parent, np.arange(trials, dtype=np.uint64))


def run_raw(
    config: NetworkConfig,
    d: float,
    trials: int,
    *,
    tie_break: TieBreak = TieBreak.UNIFORM,
    threads: int = 1,
):
    """Simulate `trials` fresh instances; returns (tau, delivered) arrays.

    Chunks the seed array across `threads` workers; the outputs are
    reassembled in chunk order, so the result is identical for every thread
    count.  Any kernel invariant violation aborts the run loudly.
    """
    if trials < 1:
        raise ValidationError(f"need trials >= 1, got {trials}")
    if threads < 1:
        raise ValidationError(f"need threads >= 1, got {threads}")
    seeds = trial_seed_block(config.seed, trials)
    tie_uniform = tie_break is TieBreak.UNIFORM
    args = (config.R, config.r, config.delta, config.n, d)
    kw = dict(lrc_enabled=config.lrc_enabled, tie_uniform=tie_uniform)
    if threads == 1:
        tau, delivered, viol = kernel.run_trials(*args, seeds, **kw)
    else:
        bounds = [trials * i // threads for i in range(threads + 1)]
        parts = [None] * threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(kernel.run_trials, *args, seeds[bounds[j] : bounds[j + 1]], **kw): j
                for j in range(threads)
            }
            for fut in futures:
                parts[futures[fut]] = fut.result()
        tau = np.concatenate([p[0] for p in parts])
        delivered = np.concatenate([p[1] for p in parts])
        viol = np.concatenate([p[2] for p in parts])
    if viol.max(initial=0) != 0:
        bad = int(np.flatnonzero(viol)[0])
        raise InvariantViolation(
            f"kernel reported violation bits {int(viol[bad])} in trial {bad} "
            f"(d={d}, n={config.n}, seed={config.seed})"
        )
    return tau, delivered


def summarize(
    config: NetworkConfig, d: float, tau: np.ndarray, delivered: np.ndarray,
    curve: DeliveryCurve,
) -> SummaryRow:
    trials = int(tau.shape[0])
    mask = delivered == 1
    count = int(np.count_nonzero(mask))
    if count:
        picked = tau[mask]
        mean_delivered = float(picked.mean())
        mean_indicator = float(picked.sum() / trials)
        std_delivered = float(picked.std())  # ddof=0
    else:
        mean_delivered = 0.0
        mean_indicator = 0.0
        std_delivered = 0.0
    fail_rate = float((trials - count) / trials)
    analytic = g_of_d(curve, d)
    return SummaryRow(
        d=float(d),
        d_over_r=float(d / config.r),
        n=config.n,
        trials=trials,
        mean_delivered=mean_delivered,
        mean_indicator=mean_indicator,
        std_delivered=std_delivered,
        fail_rate=fail_rate,
        analytic_g=float(analytic),
        abs_error=float(abs(mean_delivered - analytic)),
    )


def run_cell(
    config: NetworkConfig,
    d: float,
    trials: int,
    *,
    tie_break: TieBreak = TieBreak.UNIFORM,
    threads: int = 1,
    curve: DeliveryCurve | None = None,
) -> SummaryRow:
    """One (config, d) cell: fresh instance per trial, aggregated."""
    if curve is None:
        curve = delivery_table(config.R, config.r)
    tau, delivered = run_raw(config, d, trials, tie_break=tie_break, threads=threads)
    return summarize(config, d, tau, delivered, curve)


def sweep_separation(
    spec: SweepSpec,
    *,
    tie_break: TieBreak = TieBreak.UNIFORM,
    threads: int = 1,
):
    """One row per (n, d) cell plus the full analytic curve.

    Cells are enumerated n-major (ordinal = n_index * len(d_grid) + d_index)
    and each gets its own seed from the master seed, so adding a d value or
    an n value changes only the cells after it in the enumeration.
    """
    curve = delivery_table(spec.config.R, spec.config.r)
    rows = []
    for i_n, n in enumerate(spec.n_list):
        for i_d, d in enumerate(spec.d_grid):
            ordinal = i_n * len(spec.d_grid) + i_d
            cell_cfg = replace(
                spec.config, n=n, seed=stream_seed(spec.config.seed, TAG_CELL, ordinal)
            )
            rows.append(
                run_cell(cell_cfg, d, spec.trials,
                         tie_break=tie_break, threads=threads, curve=curve)
            )
    return rows, curve


def convergence_study(
    config: NetworkConfig,
    d: float,
    n_list,
    trials: int,
    *,
    tie_break: TieBreak = TieBreak.UNIFORM,
    threads: int = 1,
):
    """Rows for ascending n at fixed d, for error-vs-n trend reading."""
    n_list = tuple(n_list)
    if not n_list:
        raise ValidationError("convergence study needs at least one n value")
    for a, b in zip(n_list, n_list[1:]):
        if b <= a:
            raise ValidationError(f"n_list must be strictly ascending, got {n_list}")
    curve = delivery_table(config.R, config.r)
    rows = []
    for i, n in enumerate(n_list):
        cell_cfg = replace(config, n=n, seed=stream_seed(config.seed, TAG_CELL, i))
        rows.append(
            run_cell(cell_cfg, d, trials, tie_break=tie_break, threads=threads, curve=curve)
        )
    return rows


def tail_probability(
    config: NetworkConfig,
    d: float,
    trials: int,
    *,
    tie_break: TieBreak = TieBreak.UNIFORM,
    threads: int = 1,
):
    """(B, empirical P{tau > B}) with B = floor(d/(r - delta)) + 1.

    Routing failures count as tau > B; delivered trials can never exceed B
    under the forwarding rule, so the probability is dominated by failures.
    """
    B = delivery_bound(d, config.r, config.delta)
    tau, _ = run_raw(config, d, trials, tie_break=tie_break, threads=threads)
    exceed = int(np.count_nonzero(~(tau <= B)))
    return B, exceed / trials


def _lazy_lrc_position(R: float, r: float, n: int, node: Point, trial_seed: int):
    """Position of the long-range contact the node at `node` would get in the
    trial's instance, materializing only the relays the draw inspects.
    Returns None when no relay lies outside B(node, r)."""
    seed_p = stream_seed(trial_seed, TAG_PLACE)
    lrc_seed = stream_seed(trial_seed, TAG_LRC, 0)
    r2 = r * r
    for a in range(_LRC_ATTEMPTS):
        u = u01(lrc_seed, a)
        idx = min(int(u * n), n - 1)
        x = u01(seed_p, 1 + 2 * idx) * R
        y = u01(seed_p, 2 + 2 * idx) * R
        dx = x - node.x
        dy = y - node.y
        if dx * dx + dy * dy >= r2:
            return x, y
    coords = u01_block(seed_p, 1, 2 * n)
    xs = coords[0::2] * R
    ys = coords[1::2] * R
    dxa = xs - node.x
    dya = ys - node.y
    mask = dxa * dxa + dya * dya >= r2
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        return None
    u = u01(lrc_seed, _LRC_ATTEMPTS)
    pick = min(int(u * candidates.size), candidates.size - 1)
    j = int(candidates[pick])
    return float(xs[j]), float(ys[j])


def validate_lrc_distribution(
    config: NetworkConfig,
    node_position: Point,
    regions,
    draws: int,
):
    """Empirical vs predicted region frequencies of one node's contact.

    Each draw uses a fresh instance (trial streams of config.seed); the
    prediction for rectangle A is area(A - B)/area(D - B) with B the node's
    ball, computed by quadrature.  Returns ([RegionCheck, ...], none_count);
    draws with no qualifying relay are excluded from the fractions.
    """
    if draws < 1:
        raise ValidationError(f"need draws >= 1, got {draws}")
    dom = Domain(config.R)
    denom = region_area_minus_ball(
        dom, (0.0, config.R, 0.0, config.R), node_position, config.r
    )
    rects = [tuple(rect) for rect in regions]
    predicted = [
        region_area_minus_ball(dom, rect, node_position, config.r) / denom
        for rect in rects
    ]
    hits = [0] * len(rects)
    none_count = 0
    for t in range(draws):
        trial_seed = stream_seed(config.seed, TAG_TRIAL, t)
        pos = _lazy_lrc_position(config.R, config.r, config.n, node_position, trial_seed)
        if pos is None:
            none_count += 1
            continue
        x, y = pos
        for i, (x0, x1, y0, y1) in enumerate(rects):
            if x0 <= x <= x1 and y0 <= y <= y1:
                hits[i] += 1
    effective = draws - none_count
    checks = []
    for i, rect in enumerate(rects):
        p = predicted[i]
        obs = hits[i] / effective if effective else 0.0
        sigma = math.sqrt(effective * p * (1.0 - p)) if 0.0 < p < 1.0 else 0.0
        if sigma > 0.0:
            z = (hits[i] - effective * p) / sigma
        else:
            z = 0.0 if hits[i] == round(effective * p) else math.inf
        checks.append(RegionCheck(rect=rect, observed=obs, predicted=p, z=z, hits=hits[i]))
    return checks, none_count


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    repr(row.d),
                    repr(row.d_over_r),
                    str(row.n),
                    str(row.trials),
                    repr(row.mean_delivered),
                    repr(row.mean_indicator),
                    repr(row.std_delivered),
                    repr(row.fail_rate),
                    repr(row.analytic_g),
                    repr(row.abs_error),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    payload = {"rows": [asdict(row) for row in rows]}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file in the same directory and rename into place, so
    a failed run never leaves a partial output file."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
