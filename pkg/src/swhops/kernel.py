"""Simulation backend selection and the bulk-trial entry points.

The compiled extension is used when it is importable; otherwise the
pure-Python kernel takes over, bit-identical but slower.  Set
SWHOPS_BACKEND=c or SWHOPS_BACKEND=py to force a backend explicitly (forcing
c fails loudly when the extension is not built).

Both backends expose the same two calls:

  run_trials   bulk simulation into preallocated arrays, one row per trial
  route_single one trial with the full hop trail, for equivalence checks

Trial seeds address every draw a trial makes (see rng.py), so results do not
depend on batching, threading or evaluation order.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ValidationError

_requested = os.environ.get("SWHOPS_BACKEND", "").strip().lower()

if _requested == "py":
    from . import _kernel_py as _impl

    BACKEND = "py"
elif _requested in ("", "c"):
    try:
        from . import _kernel as _impl  # compiled extension

        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise ValidationError(
                "SWHOPS_BACKEND=c but the compiled kernel is not built; "
                "reinstall the package or set SWHOPS_BACKEND=py"
            ) from None
        from . import _kernel_py as _impl

        BACKEND = "py"
else:
    raise ValidationError(
        f"unknown SWHOPS_BACKEND value {_requested!r} (use 'c' or 'py')"
    )

# Hop kinds in route_single trails.
KIND_LOCAL = 0
KIND_LONG_RANGE = 1
KIND_DIRECT = 2

# Violation bits: any nonzero value is a kernel bug, not a routing stall.
VIOL_NONSTRICT = 1  # a hop failed to strictly decrease the distance
VIOL_REVISIT = 2  # the trajectory revisited a node
VIOL_CAP = 4  # more than n + 1 hops


def _validate(R: float, r: float, delta: float, n: int, d: float) -> None:
    if not (0 < delta < r < R / 2):
        raise ValidationError(
            f"need 0 < delta < r < R/2, got delta={delta}, r={r}, R={R}"
        )
    if n < 1:
        raise ValidationError(f"need at least one relay node, got n={n}")
    if not (0.0 <= d <= R / 2 - r):
        raise ValidationError(
            f"separation d={d} violates the edge-effect guard d <= R/2 - r = {R / 2 - r}"
        )


def run_trials(
    R: float,
    r: float,
    delta: float,
    n: int,
    d: float,
    trial_seeds,
    *,
    lrc_enabled: bool = True,
    tie_uniform: bool = True,
):
    """Simulate one trial per seed; returns (tau, delivered, viol) arrays.

    tau is float64 (inf marks a stall), delivered and viol are uint8.
    """
    _validate(R, r, delta, n, d)
    seeds = np.ascontiguousarray(trial_seeds, dtype=np.uint64)
    if seeds.ndim != 1:
        raise ValidationError("trial_seeds must be a one-dimensional array")
    T = seeds.shape[0]
    tau = np.empty(T, dtype=np.float64)
    delivered = np.zeros(T, dtype=np.uint8)
    viol = np.zeros(T, dtype=np.uint8)
    if T:
        _impl.run_trials(
            R, r, delta, n, d, lrc_enabled, tie_uniform, seeds, tau, delivered, viol
        )
    return tau, delivered, viol


def route_single(
    R: float,
    r: float,
    delta: float,
    n: int,
    d: float,
    trial_seed: int,
    *,
    lrc_enabled: bool = True,
    tie_uniform: bool = True,
):
    """One trial with its hop trail: (tau, delivered, viol, trail), where
    trail is [(to_id, kind, to_dist), ...] with to_id = -1 for the target."""
    _validate(R, r, delta, n, d)
    return _impl.route_single(
        R, r, delta, n, d, lrc_enabled, tie_uniform, int(trial_seed)
    )
