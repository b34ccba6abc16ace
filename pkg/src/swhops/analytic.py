"""Exact continuum-limit expected delivery time.

The expected hop count g(d) for a source-target separation d is piecewise
constant on annulus bands of width r.  With alpha = pi r^2 / (R^2 - pi r^2)
and beta_i = 1 - alpha (i-1)^2, the band values satisfy the first-order
recursion u_k = beta_k u_{k-1}, u_0 = 1, g_{k+1} = g_k + u_k, valid for
k <= k_max = floor(R/(2r) - 1); beyond that band the curve is capped at
g_{k_max + 1} up to the edge-effect limit d = R/2 - r.  With long-range
contacts disabled the delivery time collapses to the closed form
floor(d/r) + 1 (0 at d = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError


@dataclass(frozen=True)
class ContinuumParams:
    R: float
    r: float
    alpha: float
    k_max: int

    @staticmethod
    def from_lengths(R: float, r: float) -> "ContinuumParams":
        a = alpha(R, r)
        # Exact rational floor: floats are binary rationals, so band counts
        # never suffer boundary misclassification.
        k_max = math.floor(Fraction(R) / (2 * Fraction(r)) - 1)
        params = ContinuumParams(R=R, r=r, alpha=a, k_max=k_max)
        for i in range(1, k_max + 1):
            if 1.0 - a * (i - 1) ** 2 <= 0.0:
                raise ValidationError(
                    f"beta_{i} = 1 - alpha (i-1)^2 is not positive for R={R}, r={r}"
                )
        return params


@dataclass(frozen=True)
class DeliveryCurve:
    """g[0..k_max+1], increments u[0..k_max], and beta[1..k_max] (0-indexed)."""

    params: ContinuumParams
    g: tuple
    u: tuple
    beta: tuple


def alpha(R: float, r: float) -> float:
    """pi r^2 / (R^2 - pi r^2): the chance a uniform long-range contact lands
    within range r of the target."""
    if not (r > 0.0) or not math.isfinite(r):
        raise ValidationError(f"communication range must be positive, got r={r}")
    if not (R > 2 * r) or not math.isfinite(R):
        raise ValidationError(f"domain side must exceed 2r, got R={R}, r={r}")
    value = math.pi * r * r / (R * R - math.pi * r * r)
    if not (0.0 < value < 1.0):
        raise ValidationError(
            f"alpha = {value} is outside (0, 1); R must exceed sqrt(2 pi) r ~= {math.sqrt(2 * math.pi) * r}"
        )
    return value


def delivery_table(R: float, r: float) -> DeliveryCurve:
    """Band values g_0 .. g_{k_max+1} via the product-form recursion.

    Products of numbers in (0, 1] only shrink, so plain float accumulation is
    numerically benign; no compensated summation needed.
    """
    params = ContinuumParams.from_lengths(R, r)
    a = params.alpha
    beta = tuple(1.0 - a * (i - 1) ** 2 for i in range(1, params.k_max + 1))
    u = [1.0]
    for b in beta:
        u.append(u[-1] * b)
    g = [0.0]
    for uk in u:
        g.append(g[-1] + uk)
    return DeliveryCurve(params=params, g=tuple(g), u=tuple(u), beta=beta)


def g_of_d(curve: DeliveryCurve, d: float) -> float:
    """Piecewise-constant lookup: g_k on [(k-1)r, kr), capped at g_{k_max+1}
    on [k_max r, R/2 - r] (upper endpoint closed)."""
    p = curve.params
    d_edge = p.R / 2 - p.r
    if d < 0.0 or d > d_edge:
        raise ValidationError(
            f"separation d={d} outside [0, R/2 - r] = [0, {d_edge}]; "
            "the surrounding ball of the target must stay inside the domain"
        )
    if d == 0.0:
        return 0.0
    k = math.floor(Fraction(d) / Fraction(p.r)) + 1
    return curve.g[min(k, p.k_max + 1)]


def no_lrc_delivery_time(d: float, r: float) -> int:
    """Delivery time with long-range contacts disabled: 0 at d = 0, else
    floor(d/r) + 1."""
    if r <= 0:
        raise ValidationError(f"communication range must be positive, got {r}")
    if d < 0:
        raise ValidationError(f"distance must be non-negative, got {d}")
    if d == 0:
        return 0
    return math.floor(Fraction(d) / Fraction(r)) + 1


def curve_to_csv(curve: DeliveryCurve) -> str:
    """Rows k = 0 .. k_max+1 with band edges in units of r.

    Row 0 is the degenerate d = 0 point.  beta_k and u_k cells are blank where
    the recursion does not define them.
    """
    p = curve.params
    ratio_half = Fraction(p.R) / (2 * Fraction(p.r)) - 1  # capped band upper edge, in r units
    lines = ["k,d_lo/r,d_hi/r,beta_k,u_k,g_k"]
    for k in range(p.k_max + 2):
        if k == 0:
            d_lo, d_hi = 0.0, 0.0
        elif k <= p.k_max:
            d_lo, d_hi = float(k - 1), float(k)
        else:
            d_lo, d_hi = float(p.k_max), float(ratio_half)
        beta_cell = repr(curve.beta[k - 1]) if 1 <= k <= p.k_max else ""
        u_cell = repr(curve.u[k]) if k <= p.k_max else ""
        lines.append(f"{k},{d_lo!r},{d_hi!r},{beta_cell},{u_cell},{curve.g[k]!r}")
    return "\n".join(lines) + "\n"
