"""Delta-greedy geographic forwarding over a network instance.

A message at distance dcur in [k*r, (k+1)*r) from the target (k >= 1) must
move to a local contact inside B(target, k*r) whose progress
(dcur - new distance) is at least r - delta.  When several qualify, the
tie-break policy picks one (uniform by default, max-progress optionally).
The holder's long-range contact is taken instead when it offers strictly
more progress than the selected local candidate; when no local candidate
exists, it is taken when its own progress reaches r - delta, which keeps
every delivered trajectory within floor(d/(r - delta)) + 1 hops.  Within
direct range (dcur < r) the message goes straight to the target.

Distance bookkeeping: the current distance starts at the exact requested
separation and each hop carries sqrt of the squared distance it was selected
on, so band indices never wobble by an ulp.  All candidate filtering uses
squared distances, mirroring the simulation kernels bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import InvariantViolation, ValidationError
from .network import SOURCE, SOURCE_ID, TARGET, NetworkInstance, NodeRef
from .rng import Stream

INFINITE = math.inf


class HopKind(Enum):
    LOCAL = "local"
    LONG_RANGE = "long_range"
    DIRECT_TO_TARGET = "direct_to_target"


class TieBreak(Enum):
    UNIFORM = "uniform"
    MAX_PROGRESS = "max-progress"


@dataclass(frozen=True)
class Hop:
    from_node: NodeRef
    to_node: NodeRef
    kind: HopKind
    progress: float
    to_dist: float  # distance from the hop's endpoint to the target


@dataclass(frozen=True)
class RoutingOutcome:
    hops: tuple
    tau: float  # hop count, or inf when routing stalled
    status: str  # "delivered" or "no_candidate"

    @property
    def delivered(self) -> bool:
        return self.status == "delivered"


def delivery_bound(d: float, r: float, delta: float) -> int:
    """floor(d/(r - delta)) + 1, the hard cap on delivered hop counts.
    Exact rational floor on the float inputs."""
    if d == 0:
        return 0
    return math.floor(Fraction(d) / (Fraction(r) - Fraction(delta))) + 1


def _node_id(ref: NodeRef) -> int:
    return SOURCE_ID if ref.tag == "source" else ref.index


def next_hop(
    inst: NetworkInstance,
    current: NodeRef,
    rng: Stream,
    dcur: float | None = None,
    tie_break: TieBreak = TieBreak.UNIFORM,
) -> Hop | None:
    """One forwarding decision; None when no contact qualifies.

    Consumes exactly one draw from ``rng`` per call, so the stream counter
    equals the hop ordinal.  ``dcur`` is the bookkept distance to the target
    (defaults to measuring from coordinates).
    """
    if current.tag == "target":
        raise ValidationError("the target does not forward messages")
    p = inst.point(current)
    tx, ty = inst.target.x, inst.target.y
    if dcur is None:
        dx = p.x - tx
        dy = p.y - ty
        dcur = math.sqrt(dx * dx + dy * dy)
    u = rng.u01()
    r = inst.config.r
    if dcur < r:
        return Hop(
            from_node=current,
            to_node=TARGET,
            kind=HopKind.DIRECT_TO_TARGET,
            progress=dcur,
            to_dist=0.0,
        )
    k = int(dcur / r)  # annulus index; dcur >= r here so k >= 1
    kr = k * r
    kr2 = kr * kr
    thr = dcur - (r - inst.config.delta)
    thr2 = thr * thr
    r2 = r * r
    self_idx = current.index - 1 if current.tag == "relay" else -1
    # Scan the 3x3 grid block in canonical order; collect qualifying locals:
    # inside B(current, r), inside B(target, k*r), progress >= r - delta.
    cand: list[int] = []
    cand_dt2: list[float] = []
    for idx in inst.grid.iter_neighborhood(p.x, p.y):
        if idx == self_idx:
            continue
        ax = float(inst.xs[idx])
        ay = float(inst.ys[idx])
        dx = ax - p.x
        dy = ay - p.y
        if dx * dx + dy * dy >= r2:
            continue
        dx = ax - tx
        dy = ay - ty
        dt2 = dx * dx + dy * dy
        if dt2 < kr2 and dt2 <= thr2:
            cand.append(idx)
            cand_dt2.append(dt2)
    sel = -1
    sel_dt2 = 0.0
    if cand:
        if tie_break is TieBreak.UNIFORM:
            c = min(int(u * len(cand)), len(cand) - 1)
        else:
            c = min(range(len(cand)), key=lambda i: cand_dt2[i])
        sel = cand[c]
        sel_dt2 = cand_dt2[c]
    lrc = inst.lrc.get(_node_id(current)) if inst.config.lrc_enabled and inst.lrc else None
    if lrc is not None:
        ax = float(inst.xs[lrc - 1])
        ay = float(inst.ys[lrc - 1])
        dx = ax - tx
        dy = ay - ty
        ld2 = dx * dx + dy * dy
        take = ld2 < sel_dt2 if sel >= 0 else ld2 <= thr2
        if take:
            to_dist = math.sqrt(ld2)
            return Hop(
                from_node=current,
                to_node=NodeRef("relay", lrc),
                kind=HopKind.LONG_RANGE,
                progress=dcur - to_dist,
                to_dist=to_dist,
            )
    if sel >= 0:
        to_dist = math.sqrt(sel_dt2)
        return Hop(
            from_node=current,
            to_node=NodeRef("relay", sel + 1),
            kind=HopKind.LOCAL,
            progress=dcur - to_dist,
            to_dist=to_dist,
        )
    return None


def route(
    inst: NetworkInstance,
    rng: Stream,
    tie_break: TieBreak = TieBreak.UNIFORM,
) -> RoutingOutcome:
    """Forward from the source until delivery or a stall.

    The hop cap n + 1 is a bug trap: strict distance decrease makes longer
    trajectories impossible, so reaching the cap raises InvariantViolation.
    """
    hops: list[Hop] = []
    if inst.d == 0.0:
        return RoutingOutcome(hops=(), tau=0, status="delivered")
    current = SOURCE
    dcur = inst.d
    seen = {("source", 0)}
    cap = inst.n + 1
    while True:
        hop = next_hop(inst, current, rng, dcur=dcur, tie_break=tie_break)
        if hop is None:
            return RoutingOutcome(hops=tuple(hops), tau=INFINITE, status="no_candidate")
        if hop.to_dist >= dcur:
            raise InvariantViolation(
                f"hop did not strictly decrease the distance: {dcur} -> {hop.to_dist}"
            )
        hops.append(hop)
        if hop.kind is HopKind.DIRECT_TO_TARGET:
            return RoutingOutcome(hops=tuple(hops), tau=len(hops), status="delivered")
        key = (hop.to_node.tag, hop.to_node.index)
        if key in seen:
            raise InvariantViolation(f"trajectory revisited node {key}")
        seen.add(key)
        if len(hops) > cap:
            raise InvariantViolation(f"hop cap n + 1 = {cap} exceeded")
        current = hop.to_node
        dcur = hop.to_dist


def trajectory_to_json(inst: NetworkInstance, outcome: RoutingOutcome) -> str:
    """Hop list with kinds, endpoints and positions, for path plotting."""
    def pos(ref):
        p = inst.point(ref)
        return [p.x, p.y]

    hops = [
        {
            "from": {"tag": h.from_node.tag, "index": h.from_node.index, "pos": pos(h.from_node)},
            "to": {"tag": h.to_node.tag, "index": h.to_node.index, "pos": pos(h.to_node)},
            "kind": h.kind.value,
            "progress": h.progress,
            "to_dist": h.to_dist,
        }
        for h in outcome.hops
    ]
    return json.dumps(
        {"tau": None if outcome.tau == INFINITE else outcome.tau, "status": outcome.status, "hops": hops},
        sort_keys=True,
    )
