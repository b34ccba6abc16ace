"""Finite-n network instances: relay placement, local neighborhoods, and one
outgoing long-range contact per node.

Construction follows a fixed draw protocol (see rng.py) so instances are
reproducible bit-for-bit from (config.seed-derived) streams and so the
object-level API here matches the simulation kernels exactly:

  placement stream:  ctr 0 source angle, then relay j at ctr 1+2j / 2+2j
  LRC of node i:     its own stream; up to 64 rejection attempts, then one
                     exhaustive-fallback pick (ctr 64)

Node ids in the LRC map: 0 is the source, 1..n are relays.  The target never
forwards and has no outgoing contact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import Domain, Point, dist
from .rng import Stream

SOURCE_ID = 0

_LRC_ATTEMPTS = 64


@dataclass(frozen=True)
class NetworkConfig:
    R: float
    r: float
    delta: float
    n: int
    lrc_enabled: bool = True
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.delta < self.r < self.R / 2):
            raise ValidationError(
                f"need 0 < delta < r < R/2, got delta={self.delta}, r={self.r}, R={self.R}"
            )
        if self.n < 1:
            raise ValidationError(f"need at least one relay node, got n={self.n}")

    @property
    def domain(self) -> Domain:
        return Domain(self.R)


@dataclass(frozen=True)
class NodeRef:
    """tag is one of 'source', 'relay', 'target'; relay indices run 1..n."""

    tag: str
    index: int = 0

    def __post_init__(self):
        if self.tag not in ("source", "relay", "target"):
            raise ValidationError(f"unknown node tag {self.tag!r}")
        if self.tag == "relay" and self.index < 1:
            raise ValidationError(f"relay index must be >= 1, got {self.index}")


SOURCE = NodeRef("source")
TARGET = NodeRef("target")


class GridIndex:
    """Uniform grid over relay points, cell side r, CSR cell lists.

    Cells are numbered cy * ncx + cx; within a cell, relays appear in
    ascending index order (stable sort).  A disc of radius r around any point
    is covered by the 3x3 block of cells centred on the point's cell, scanned
    row-major — the simulation kernels use the identical layout and order.
    """

    def __init__(self, xs: np.ndarray, ys: np.ndarray, R: float, r: float):
        self.r = r
        self.ncx = int(math.ceil(R / r))
        cx = np.minimum((xs / r).astype(np.int64), self.ncx - 1)
        cy = np.minimum((ys / r).astype(np.int64), self.ncx - 1)
        cells = cy * self.ncx + cx
        self.order = np.argsort(cells, kind="stable").astype(np.int64)
        counts = np.bincount(cells, minlength=self.ncx * self.ncx)
        self.start = np.zeros(self.ncx * self.ncx + 1, dtype=np.int64)
        np.cumsum(counts, out=self.start[1:])

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        cx = min(int(x / self.r), self.ncx - 1)
        cy = min(int(y / self.r), self.ncx - 1)
        return cx, cy

    def iter_neighborhood(self, x: float, y: float):
        """Yield 0-based relay indices from the 3x3 cell block around (x, y),
        in the canonical scan order."""
        cx, cy = self.cell_of(x, y)
        for gy in range(max(0, cy - 1), min(self.ncx, cy + 2)):
            base = gy * self.ncx
            for gx in range(max(0, cx - 1), min(self.ncx, cx + 2)):
                c = base + gx
                for idx in self.order[self.start[c] : self.start[c + 1]]:
                    yield int(idx)


@dataclass
class NetworkInstance:
    config: NetworkConfig
    d: float
    xs: np.ndarray  # relay x coordinates, 0-based array for relays 1..n
    ys: np.ndarray
    source: Point
    target: Point
    lrc: dict = field(default_factory=dict)  # node id (0=source, 1..n) -> relay id or None
    grid: GridIndex = None

    def __post_init__(self):
        if self.grid is None:
            self.grid = GridIndex(self.xs, self.ys, self.config.R, self.config.r)

    @property
    def n(self) -> int:
        return int(self.xs.shape[0])

    @property
    def relays(self) -> tuple:
        return tuple(Point(float(x), float(y)) for x, y in zip(self.xs, self.ys))

    def point(self, ref: NodeRef) -> Point:
        if ref.tag == "source":
            return self.source
        if ref.tag == "target":
            return self.target
        return Point(float(self.xs[ref.index - 1]), float(self.ys[ref.index - 1]))

    def to_json(self) -> str:
        """Debug/replay dump: config, point arrays, LRC map."""
        payload = {
            "config": {
                "R": self.config.R,
                "r": self.config.r,
                "delta": self.config.delta,
                "n": self.config.n,
                "lrc_enabled": self.config.lrc_enabled,
                "seed": self.config.seed,
            },
            "d": self.d,
            "source": [self.source.x, self.source.y],
            "target": [self.target.x, self.target.y],
            "relays_x": self.xs.tolist(),
            "relays_y": self.ys.tolist(),
            "lrc": {str(k): v for k, v in self.lrc.items()},
        }
        return json.dumps(payload, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "NetworkInstance":
        data = json.loads(text)
        cfg = NetworkConfig(**data["config"])
        inst = NetworkInstance(
            config=cfg,
            d=data["d"],
            xs=np.asarray(data["relays_x"], dtype=np.float64),
            ys=np.asarray(data["relays_y"], dtype=np.float64),
            source=Point(*data["source"]),
            target=Point(*data["target"]),
        )
        inst.lrc = {int(k): v for k, v in data["lrc"].items()}
        return inst


def max_separation(config: NetworkConfig) -> float:
    return config.R / 2 - config.r


def place_nodes(config: NetworkConfig, d: float, rng: Stream) -> NetworkInstance:
    """Target at the domain centre, source at separation exactly d in a
    uniformly random direction, n relays i.i.d. uniform on the square.

    The target's surrounding ball of radius d + r must stay inside the domain
    (edge-effect guard), which with a centred target is exactly d <= R/2 - r.
    """
    if not (0.0 <= d <= max_separation(config)):
        raise ValidationError(
            f"separation d={d} violates the edge-effect guard: the ball of radius "
            f"d + r around the target must stay inside the domain (d <= R/2 - r = "
            f"{max_separation(config)})"
        )
    R = config.R
    target = Point(R / 2, R / 2)
    theta = 2.0 * math.pi * rng.u01()
    source = Point(target.x + d * math.cos(theta), target.y + d * math.sin(theta))
    coords = rng.u01_block(2 * config.n)
    xs = coords[0::2] * R
    ys = coords[1::2] * R
    return NetworkInstance(config=config, d=d, xs=xs, ys=ys, source=source, target=target)


def _draw_lrc(inst: NetworkInstance, node_id: int, px: float, py: float, stream: Stream) -> int | None:
    """One node's contact: uniform over relays outside B(node, r), excluding
    itself; rejection with an exhaustive fallback so empty candidate sets
    yield None instead of spinning."""
    n = inst.n
    r2 = inst.config.r * inst.config.r
    xs, ys = inst.xs, inst.ys
    self_idx = node_id - 1  # 0-based relay index, -1 for the source
    for _ in range(_LRC_ATTEMPTS):
        u = stream.u01()
        idx = min(int(u * n), n - 1)
        if idx == self_idx:
            continue
        dx = xs[idx] - px
        dy = ys[idx] - py
        if dx * dx + dy * dy >= r2:
            return idx + 1
    stream.seek(_LRC_ATTEMPTS)
    dx = xs - px
    dy = ys - py
    mask = dx * dx + dy * dy >= r2
    if self_idx >= 0:
        mask[self_idx] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        return None
    u = stream.u01()
    pick = min(int(u * candidates.size), candidates.size - 1)
    return int(candidates[pick]) + 1


def assign_lrcs(inst: NetworkInstance, rng: Stream) -> NetworkInstance:
    """Draw every node's outgoing long-range contact (source and relays; the
    target never forwards).  Source and relays alike choose among relays only.
    Contacts are immutable once assigned."""
    if not inst.config.lrc_enabled:
        raise ValidationError("long-range contacts are disabled in this configuration")
    if inst.lrc:
        raise ValidationError("long-range contacts are already assigned and are immutable")
    lrc: dict[int, int | None] = {}
    lrc[SOURCE_ID] = _draw_lrc(inst, SOURCE_ID, inst.source.x, inst.source.y, rng.spawn(SOURCE_ID))
    for j in range(inst.n):
        node_id = j + 1
        lrc[node_id] = _draw_lrc(
            inst, node_id, float(inst.xs[j]), float(inst.ys[j]), rng.spawn(node_id)
        )
    inst.lrc = lrc
    return inst


def local_contacts(inst: NetworkInstance, node: NodeRef) -> list[NodeRef]:
    """Every node strictly within distance r, excluding the node itself:
    relays first (ascending index), then source, then target when they apply.
    Exhaustive, served by the grid index."""
    p = inst.point(node)
    r = inst.config.r
    r2 = r * r
    out: list[NodeRef] = []
    self_relay = node.index - 1 if node.tag == "relay" else -1
    hits = []
    for idx in inst.grid.iter_neighborhood(p.x, p.y):
        if idx == self_relay:
            continue
        dx = float(inst.xs[idx]) - p.x
        dy = float(inst.ys[idx]) - p.y
        if dx * dx + dy * dy < r2:
            hits.append(idx + 1)
    out.extend(NodeRef("relay", i) for i in sorted(hits))
    if node.tag != "source" and dist(p, inst.source) < r:
        out.append(SOURCE)
    if node.tag != "target" and dist(p, inst.target) < r:
        out.append(TARGET)
    return out
