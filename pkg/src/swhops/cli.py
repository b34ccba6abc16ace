"""Command-line front end.

Subcommands
-----------
analytic      export the expected-delivery-time curve (band table) as CSV
simulate      one Monte Carlo cell (fixed n, d); summary row as CSV/JSON
sweep         grid of (d, n) cells; writes the summary table and, alongside
              it, the analytic band curve (or the curve alone when no --n)
convergence   fixed d, ascending n list; error-vs-n rows (medians over seeds)
tail          fixed d, n list; empirical P{tau > B} with B = floor(d/(r-delta))+1
validate-lrc  empirical long-range-contact distribution vs quadrature areas

Lengths (--R, --d, --delta, grids, node/region coordinates) are given in
units of r unless --absolute is passed; r itself defaults to 1.  A --config
file holds flat key=value lines using the long flag names (e.g. ``trials=2000``,
``no-lrc=true``); explicit flags override file values.

Exit codes: 0 success, 2 validation error (bad flags, config, or paths),
3 invariant violation or unexpected runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from dataclasses import replace

from . import __version__
from .analytic import curve_to_csv, delivery_table
from .errors import InvariantViolation, ValidationError
from .experiments import (
    SummaryRow,
    SweepSpec,
    convergence_study,
    rows_to_csv,
    rows_to_json,
    run_cell,
    sweep_separation,
    tail_probability,
    validate_lrc_distribution,
    write_text_atomic,
)
from .geometry import Point
from .kernel import BACKEND
from .network import NetworkConfig
from .rng import TAG_CELL, stream_seed
from .routing import TieBreak, delivery_bound

_GRID_EPS = 1e-9  # absorbs float noise in (stop-start)/step when counting grid points


# ---------------------------------------------------------------------------
# value parsers (shared by flags and config-file entries)

def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"expected a number, got {text!r}") from None


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"expected an integer, got {text!r}") from None


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> tuple:
    items = [part.strip() for part in text.split(",") if part.strip()]
    return tuple(_parse_int(part) for part in items)


def _parse_grid(text: str) -> tuple:
    """Either ``start:stop:step`` or a comma-separated list of values.

    The stepped form yields start + i*step for i = 0 .. floor((stop-start)/step),
    with a small epsilon so a stop that lands exactly on a step is included.
    """
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(
                f"grid must be start:stop:step or v1,v2,..., got {text!r}"
            )
        start, stop, step = (_parse_float(p) for p in parts)
        if step <= 0:
            raise ValidationError(f"grid step must be positive, got {step}")
        if stop < start:
            raise ValidationError(f"grid stop {stop} is below start {start}")
        count = int(math.floor((stop - start) / step + _GRID_EPS)) + 1
        return tuple(start + i * step for i in range(count))
    return tuple(_parse_float(p) for p in text.split(",") if p.strip())


def _parse_point(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValidationError(f"point must be x,y — got {text!r}")
    return (_parse_float(parts[0]), _parse_float(parts[1]))


def _parse_rect(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValidationError(f"rectangle must be x0,x1,y0,y1 — got {text!r}")
    return tuple(_parse_float(p) for p in parts)


# ---------------------------------------------------------------------------
# argument plumbing

_CONVERTERS = {
    "R": _parse_float,
    "r": _parse_float,
    "delta": _parse_float,
    "d": _parse_float,
    "d-grid": _parse_grid,
    "n": _parse_int_list,
    "trials": _parse_int,
    "seed": _parse_int,
    "seeds": _parse_int_list,
    "threads": _parse_int,
    "no-lrc": _parse_bool,
    "absolute": _parse_bool,
    "tie-break": str,
    "format": str,
    "out": str,
    "node": _parse_point,
    "region": lambda text: [_parse_rect(part) for part in text.split(";") if part.strip()],
}


def _load_config_file(path: str) -> dict:
    """Flat key=value lines; blank lines and #-comments ignored."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(
                f"{path}:{lineno}: expected key=value, got {line!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONVERTERS:
            known = ", ".join(sorted(_CONVERTERS))
            raise ValidationError(
                f"{path}:{lineno}: unknown config key {key!r} (known keys: {known})"
            )
        values[key] = _CONVERTERS[key](value.strip())
    return values


class _Resolver:
    """Merges flag values over config-file values over hard defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = (
            _load_config_file(args.config) if getattr(args, "config", None) else {}
        )

    def get(self, key: str, default=None):
        flag = getattr(self.args, key.replace("-", "_"), None)
        if flag is not None:
            return flag
        if key in self.file:
            return self.file[key]
        return default


def _add_common(sub: argparse.ArgumentParser, *, lengths=True) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="key=value file supplying defaults; flags override")
    sub.add_argument("--out", metavar="FILE",
                     help="output path (written atomically); stdout if omitted")
    sub.add_argument("--format", choices=("csv", "json"), default=None,
                     help="output format (default csv)")
    if lengths:
        sub.add_argument("--r", type=_parse_float, default=None, metavar="LEN",
                         help="communication range (absolute; default 1)")
        sub.add_argument("--absolute", action="store_true", default=None,
                         help="interpret lengths as absolute instead of units of r")


def _add_sim_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--R", type=_parse_float, default=None, metavar="LEN",
                     help="domain side length, in units of r (default 20)")
    sub.add_argument("--delta", type=_parse_float, default=None, metavar="LEN",
                     help="progress slack, in units of r (default 0.1)")
    sub.add_argument("--trials", type=_parse_int, default=None, metavar="COUNT",
                     help="Monte Carlo trials per cell (default 1000)")
    sub.add_argument("--seed", type=_parse_int, default=None, metavar="INT",
                     help="master seed (default 0)")
    sub.add_argument("--no-lrc", action="store_true", default=None,
                     help="disable long-range contacts")
    sub.add_argument("--tie-break", choices=("uniform", "max-progress"), default=None,
                     help="choice among qualifying local contacts (default uniform)")
    sub.add_argument("--threads", type=_parse_int, default=None, metavar="COUNT",
                     help="worker threads; output is identical for any value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swhops",
        description=(
            "Expected message delivery time in planar small-world networks: "
            "exact continuum curve and seeded Monte Carlo validation. "
            "Lengths are in units of r unless --absolute is given."
        ),
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser(
        "analytic",
        help="export the analytic delivery-time band table",
        description="Band table k, d_lo/r, d_hi/r, beta_k, u_k, g_k. "
                    "Prints k_max, alpha, and the plateau value.",
    )
    p.add_argument("--R", type=_parse_float, default=None, metavar="LEN",
                   help="domain side length, in units of r (required, > 2)")
    _add_common(p)

    p = subs.add_parser(
        "simulate",
        help="run one Monte Carlo cell (fixed n and d)",
        description="One summary row for a single (n, d) cell.",
    )
    p.add_argument("--d", type=_parse_float, default=None, metavar="LEN",
                   help="source-target separation, in units of r (required)")
    p.add_argument("--n", type=_parse_int, default=None, metavar="COUNT",
                   help="relay count (required)")
    _add_sim_common(p)
    _add_common(p)

    p = subs.add_parser(
        "sweep",
        help="run a (d, n) grid of cells; also export the analytic curve",
        description="Summary rows over a separation grid for each n. With no "
                    "--n the analytic band table alone is exported (usable at "
                    "domain sizes beyond simulation scale).",
    )
    p.add_argument("--d-grid", type=_parse_grid, default=None, metavar="GRID",
                   help="start:stop:step or v1,v2,... in units of r "
                        "(default 0 : R/2-r : 0.25)")
    p.add_argument("--n", type=_parse_int_list, default=None, metavar="LIST",
                   help="comma-separated relay counts; omit for analytic-only")
    _add_sim_common(p)
    _add_common(p)

    p = subs.add_parser(
        "convergence",
        help="fixed d, ascending n: error vs analytic curve",
        description="One summary row per n; with several --seeds each numeric "
                    "column is the median across master seeds.",
    )
    p.add_argument("--d", type=_parse_float, default=None, metavar="LEN",
                   help="source-target separation, in units of r (required)")
    p.add_argument("--n", type=_parse_int_list, default=None, metavar="LIST",
                   help="comma-separated ascending relay counts (required)")
    p.add_argument("--seeds", type=_parse_int_list, default=None, metavar="LIST",
                   help="comma-separated master seeds for median aggregation")
    _add_sim_common(p)
    _add_common(p)

    p = subs.add_parser(
        "tail",
        help="empirical P{tau > B} with B = floor(d/(r-delta)) + 1",
        description="Delivered trials never exceed B, so only routing "
                    "failures contribute; medians across --seeds.",
    )
    p.add_argument("--d", type=_parse_float, default=None, metavar="LEN",
                   help="source-target separation, in units of r (required)")
    p.add_argument("--n", type=_parse_int_list, default=None, metavar="LIST",
                   help="comma-separated relay counts (required)")
    p.add_argument("--seeds", type=_parse_int_list, default=None, metavar="LIST",
                   help="comma-separated master seeds for median aggregation")
    _add_sim_common(p)
    _add_common(p)

    p = subs.add_parser(
        "validate-lrc",
        help="check the long-range-contact distribution against areas",
        description="Repeated fresh placements; observed region fractions vs "
                    "quadrature-predicted area fractions, as z-scores. "
                    "Defaults: node at the domain centre, the four quadrants "
                    "plus one off-centre rectangle.",
    )
    p.add_argument("--n", type=_parse_int, default=None, metavar="COUNT",
                   help="relay count per placement (default 8000)")
    p.add_argument("--node", type=_parse_point, default=None, metavar="X,Y",
                   help="test node position, in units of r (default centre)")
    p.add_argument("--region", action="append", type=_parse_rect, default=None,
                   metavar="X0,X1,Y0,Y1",
                   help="rectangle in units of r; repeatable (default quadrants "
                        "+ one off-centre rectangle)")
    _add_sim_common(p)
    _add_common(p)

    return parser


# ---------------------------------------------------------------------------
# shared resolution helpers

def _resolve_lengths(res: _Resolver):
    """(r, scale): multiply user lengths by `scale` to get absolute lengths."""
    r = res.get("r", 1.0)
    if r <= 0:
        raise ValidationError(f"communication range r must be positive, got {r}")
    absolute = bool(res.get("absolute", False))
    return r, (1.0 if absolute else r)


def _resolve_network(res: _Resolver, n: int, seed=None) -> NetworkConfig:
    r, scale = _resolve_lengths(res)
    R = res.get("R", 20.0) * scale
    delta = res.get("delta", 0.1) * scale
    return NetworkConfig(
        R=R, r=r, delta=delta, n=n,
        lrc_enabled=not bool(res.get("no-lrc", False)),
        seed=res.get("seed", 0) if seed is None else seed,
    )


def _resolve_tie(res: _Resolver) -> TieBreak:
    name = res.get("tie-break", "uniform")
    try:
        return TieBreak(name)
    except ValueError:
        raise ValidationError(
            f"tie-break must be 'uniform' or 'max-progress', got {name!r}"
        ) from None


def _require(res: _Resolver, key: str, what: str):
    value = res.get(key)
    if value is None:
        raise ValidationError(f"--{key} is required: {what}")
    return value


def _emit(res: _Resolver, text: str, summary_lines) -> None:
    """Write `text` to --out atomically, or to stdout; then print the summary."""
    out = res.get("out")
    if out is None:
        sys.stdout.write(text)
        for line in summary_lines:
            print(line, file=sys.stderr)
    else:
        write_text_atomic(out, text)
        for line in summary_lines:
            print(line)
        print(f"wrote {out}")


def _median_rows(tables) -> list:
    """Element-wise medians of SummaryRow float fields across per-seed tables."""
    merged = []
    for rows in zip(*tables):
        head = rows[0]
        merged.append(SummaryRow(
            d=head.d, d_over_r=head.d_over_r, n=head.n, trials=head.trials,
            mean_delivered=statistics.median(row.mean_delivered for row in rows),
            mean_indicator=statistics.median(row.mean_indicator for row in rows),
            std_delivered=statistics.median(row.std_delivered for row in rows),
            fail_rate=statistics.median(row.fail_rate for row in rows),
            analytic_g=head.analytic_g,
            abs_error=statistics.median(row.abs_error for row in rows),
        ))
    return merged


def _rows_payload(res: _Resolver, rows) -> str:
    return rows_to_json(rows) if res.get("format", "csv") == "json" else rows_to_csv(rows)


def _seeds(res: _Resolver) -> tuple:
    seeds = res.get("seeds")
    if seeds is None:
        return (res.get("seed", 0),)
    if not seeds:
        raise ValidationError("--seeds must list at least one seed")
    return tuple(seeds)


# ---------------------------------------------------------------------------
# subcommands

def cmd_analytic(res: _Resolver) -> int:
    r, scale = _resolve_lengths(res)
    R = _require(res, "R", "domain side length in units of r") * scale
    curve = delivery_table(R, r)
    params = curve.params
    if res.get("format", "csv") == "json":
        bands = []
        for line in curve_to_csv(curve).strip().split("\n")[1:]:
            k, d_lo, d_hi, beta, u, g = line.split(",")
            bands.append({
                "k": int(k), "d_lo_over_r": float(d_lo), "d_hi_over_r": float(d_hi),
                "beta_k": float(beta) if beta else None,
                "u_k": float(u) if u else None, "g_k": float(g),
            })
        text = json.dumps(
            {"R_over_r": R / r, "alpha": params.alpha, "k_max": params.k_max,
             "plateau": curve.g[params.k_max + 1], "bands": bands},
            sort_keys=True, indent=2,
        ) + "\n"
    else:
        text = curve_to_csv(curve)
    _emit(res, text, [
        f"k_max = {params.k_max}",
        f"alpha = {params.alpha!r}",
        f"plateau g_(k_max+1) = {curve.g[params.k_max + 1]!r}",
    ])
    return 0


def cmd_simulate(res: _Resolver) -> int:
    _, scale = _resolve_lengths(res)
    d = _require(res, "d", "source-target separation in units of r") * scale
    n_value = _require(res, "n", "relay count")
    n = n_value[0] if isinstance(n_value, tuple) else int(n_value)
    config = _resolve_network(res, n)
    row = run_cell(config, d, res.get("trials", 1000),
                   tie_break=_resolve_tie(res), threads=res.get("threads", 1))
    _emit(res, _rows_payload(res, [row]), [
        f"backend = {BACKEND}",
        f"mean_delivered = {row.mean_delivered!r}  fail_rate = {row.fail_rate!r}",
        f"analytic_g = {row.analytic_g!r}  abs_error = {row.abs_error!r}",
    ])
    return 0


def cmd_sweep(res: _Resolver) -> int:
    r, scale = _resolve_lengths(res)
    template = _resolve_network(res, 1)
    grid = res.get("d-grid")
    if grid is None:
        stop = template.R / 2 - r
        count = int(math.floor(stop / (0.25 * r) + _GRID_EPS)) + 1
        grid = tuple(i * 0.25 * r for i in range(count))
    else:
        grid = tuple(value * scale for value in grid)
    n_list = res.get("n", ())
    spec = SweepSpec(config=template, d_grid=grid,
                     trials=res.get("trials", 1000), n_list=tuple(n_list))
    rows, curve = sweep_separation(spec, tie_break=_resolve_tie(res),
                                   threads=res.get("threads", 1))
    if not spec.n_list:
        _emit(res, curve_to_csv(curve),
              [f"analytic-only export: k_max = {curve.params.k_max}"])
        return 0
    out = res.get("out")
    summary = [f"{len(rows)} cells ({len(spec.n_list)} n values x {len(grid)} separations)"]
    if out is not None:
        stem, dot, ext = out.rpartition(".")
        curve_path = (stem if dot else out) + ".analytic." + (ext if dot else "csv")
        write_text_atomic(curve_path, curve_to_csv(curve))
        summary.append(f"wrote {curve_path}")
    _emit(res, _rows_payload(res, rows), summary)
    return 0


def cmd_convergence(res: _Resolver) -> int:
    _, scale = _resolve_lengths(res)
    d = _require(res, "d", "source-target separation in units of r") * scale
    n_list = _require(res, "n", "comma-separated ascending relay counts")
    template = _resolve_network(res, 1)
    tables = [
        convergence_study(replace(template, seed=seed), d, n_list,
                          res.get("trials", 1000),
                          tie_break=_resolve_tie(res), threads=res.get("threads", 1))
        for seed in _seeds(res)
    ]
    rows = tables[0] if len(tables) == 1 else _median_rows(tables)
    errors = ", ".join(repr(row.abs_error) for row in rows)
    _emit(res, _rows_payload(res, rows),
          [f"abs_error by n ({len(tables)} seed(s), medians): {errors}"])
    return 0


def cmd_tail(res: _Resolver) -> int:
    _, scale = _resolve_lengths(res)
    d = _require(res, "d", "source-target separation in units of r") * scale
    n_list = _require(res, "n", "comma-separated relay counts")
    template = _resolve_network(res, 1)
    trials = res.get("trials", 1000)
    B = delivery_bound(d, template.r, template.delta)
    records = []
    for i, n in enumerate(n_list):
        ps = []
        for seed in _seeds(res):
            cfg = replace(template, n=n, seed=stream_seed(seed, TAG_CELL, i))
            got_B, p = tail_probability(cfg, d, trials,
                                        tie_break=_resolve_tie(res),
                                        threads=res.get("threads", 1))
            assert got_B == B
            ps.append(p)
        records.append((n, statistics.median(ps)))
    if res.get("format", "csv") == "json":
        text = json.dumps(
            {"rows": [{"d": d, "n": n, "trials": trials, "B": B, "p_exceed": p}
                      for n, p in records]},
            sort_keys=True, indent=2,
        ) + "\n"
    else:
        lines = ["d,n,trials,B,p_exceed"]
        lines += [f"{d!r},{n},{trials},{B},{p!r}" for n, p in records]
        text = "\n".join(lines) + "\n"
    _emit(res, text, [f"B = {B}", "p_exceed by n: "
                      + ", ".join(repr(p) for _, p in records)])
    return 0


def cmd_validate_lrc(res: _Resolver) -> int:
    r, scale = _resolve_lengths(res)
    n_value = res.get("n", 8000)
    n = n_value[0] if isinstance(n_value, tuple) else int(n_value)
    config = _resolve_network(res, n)
    if not config.lrc_enabled:
        raise ValidationError("validate-lrc needs long-range contacts enabled")
    R = config.R
    node_in = res.get("node")
    node = (Point(R / 2, R / 2) if node_in is None
            else Point(node_in[0] * scale, node_in[1] * scale))
    regions_in = res.get("region")
    if regions_in is None:
        half = R / 2
        regions = [
            (0.0, half, 0.0, half), (half, R, 0.0, half),
            (0.0, half, half, R), (half, R, half, R),
            (0.1 * R, 0.35 * R, 0.15 * R, 0.55 * R),
        ]
    else:
        regions = [tuple(v * scale for v in rect) for rect in regions_in]
    draws = res.get("trials", 10000)
    checks, none_count = validate_lrc_distribution(config, node, regions, draws)
    max_z = max((abs(check.z) for check in checks), default=0.0)
    if res.get("format", "csv") == "json":
        text = json.dumps(
            {"draws": draws, "none_count": none_count,
             "regions": [{"x0": c.rect[0], "x1": c.rect[1],
                          "y0": c.rect[2], "y1": c.rect[3],
                          "observed": c.observed, "predicted": c.predicted,
                          "z": c.z, "hits": c.hits} for c in checks]},
            sort_keys=True, indent=2,
        ) + "\n"
    else:
        lines = ["x0,x1,y0,y1,observed,predicted,z,hits"]
        lines += [
            f"{c.rect[0]!r},{c.rect[1]!r},{c.rect[2]!r},{c.rect[3]!r},"
            f"{c.observed!r},{c.predicted!r},{c.z!r},{c.hits}"
            for c in checks
        ]
        text = "\n".join(lines) + "\n"
    _emit(res, text, [
        f"draws = {draws}  none_count = {none_count}  max |z| = {max_z!r}",
    ])
    return 0


_COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "convergence": cmd_convergence,
    "tail": cmd_tail,
    "validate-lrc": cmd_validate_lrc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the diagnostic
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](_Resolver(args))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
