import json
import math

import numpy as np
import pytest

from swhops import rng
from swhops.errors import ValidationError
from swhops.geometry import Domain, Point, dist, region_area_minus_ball
from swhops.network import (
    SOURCE,
    TARGET,
    NetworkConfig,
    NetworkInstance,
    NodeRef,
    assign_lrcs,
    local_contacts,
    max_separation,
    place_nodes,
)


def make_instance(seed=7, n=200, R=10.0, d=3.2, lrc=True):
    cfg = NetworkConfig(R=R, r=1.0, delta=0.1, n=n, lrc_enabled=lrc, seed=seed)
    trial = rng.Stream(rng.stream_seed(seed, rng.TAG_TRIAL, 0))
    inst = place_nodes(cfg, d, trial.spawn(rng.TAG_PLACE))
    if lrc:
        assign_lrcs(inst, trial.spawn(rng.TAG_LRC))
    return inst


# ---------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValidationError):
        NetworkConfig(R=10, r=1, delta=0, n=10)
    with pytest.raises(ValidationError):
        NetworkConfig(R=10, r=1, delta=1.0, n=10)
    with pytest.raises(ValidationError):
        NetworkConfig(R=2.0, r=1, delta=0.1, n=10)
    with pytest.raises(ValidationError):
        NetworkConfig(R=10, r=1, delta=0.1, n=0)
    with pytest.raises(ValidationError):
        NodeRef("relay", 0)
    with pytest.raises(ValidationError):
        NodeRef("router", 1)


# ---------------------------------------------------------------- placement


def test_place_nodes_zero_separation():
    inst = make_instance(d=0.0, lrc=False, n=5)
    assert (inst.source.x, inst.source.y) == (inst.target.x, inst.target.y)


def test_place_nodes_separation_and_containment():
    inst = make_instance(d=3.2, n=500)
    assert dist(inst.source, inst.target) == pytest.approx(3.2, abs=1e-9)
    assert inst.target == Point(5.0, 5.0)
    dom = Domain(10.0)
    assert np.all((inst.xs >= 0) & (inst.xs <= 10) & (inst.ys >= 0) & (inst.ys <= 10))
    assert dom.contains(inst.source)


def test_place_nodes_rejects_edge_violation():
    cfg = NetworkConfig(R=10, r=1, delta=0.1, n=10)
    assert max_separation(cfg) == 4.0
    with pytest.raises(ValidationError):
        place_nodes(cfg, 4.0 + 1e-9, rng.Stream(1))
    with pytest.raises(ValidationError):
        place_nodes(cfg, -0.1, rng.Stream(1))


def test_place_nodes_subsquare_count_binomial():
    # Relay count in an (R/4)^2 sub-square is Binomial(n, 1/16): 4 sigma.
    n = 20_000
    cfg = NetworkConfig(R=20, r=1, delta=0.1, n=n, seed=3)
    inst = place_nodes(cfg, 5.0, rng.Stream(rng.stream_seed(3, rng.TAG_PLACE)))
    hits = int(np.count_nonzero((inst.xs < 5.0) & (inst.ys < 5.0)))
    p = 1 / 16
    sigma = math.sqrt(n * p * (1 - p))
    assert abs(hits - n * p) < 4 * sigma


def test_place_nodes_deterministic():
    a = make_instance(seed=11)
    b = make_instance(seed=11)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)
    assert a.source == b.source and a.lrc == b.lrc


# ---------------------------------------------------------------- LRC


def test_lrc_empty_candidate_set_yields_none():
    cfg = NetworkConfig(R=2.5, r=1.0, delta=0.1, n=1, seed=5)
    inst = NetworkInstance(
        config=cfg,
        d=0.0,
        xs=np.array([1.3]),
        ys=np.array([1.2]),
        source=Point(1.25, 1.25),
        target=Point(1.25, 1.25),
    )
    assign_lrcs(inst, rng.Stream(9))
    assert inst.lrc[0] is None  # only relay is within r of the source
    assert inst.lrc[1] is None  # a relay is never its own contact


def test_lrc_outside_ball_not_self_and_relay_valued():
    inst = make_instance(seed=13, n=400)
    assert set(inst.lrc.keys()) == set(range(0, 401))
    for node_id, contact in inst.lrc.items():
        assert contact is None or 1 <= contact <= 400
        if contact is None:
            continue
        assert contact != node_id
        p = inst.source if node_id == 0 else inst.point(NodeRef("relay", node_id))
        q = inst.point(NodeRef("relay", contact))
        assert dist(p, q) >= 1.0


def test_lrc_immutable_once_assigned():
    inst = make_instance(seed=17, n=50)
    with pytest.raises(ValidationError):
        assign_lrcs(inst, rng.Stream(1))


def test_lrc_requires_enabled_config():
    inst = make_instance(seed=19, n=20, lrc=False)
    with pytest.raises(ValidationError):
        assign_lrcs(inst, rng.Stream(1))


def test_lrc_distribution_matches_area_law():
    # The source's contact across many instances lands in a test rectangle
    # with probability area(A - B(X_s, r)) / area(D - B(X_s, r)): 4 sigma.
    R, r, n = 5.0, 1.0, 300
    rect = (3.0, 5.0, 0.0, 2.0)
    draws = 1500
    hits = 0
    effective = 0
    source = target = None
    for t in range(draws):
        cfg = NetworkConfig(R=R, r=r, delta=0.1, n=n, seed=101)
        trial = rng.Stream(rng.stream_seed(101, rng.TAG_TRIAL, t))
        inst = place_nodes(cfg, 0.5, trial.spawn(rng.TAG_PLACE))
        assign_lrcs(inst, trial.spawn(rng.TAG_LRC))
        source, target = inst.source, inst.target
        c = inst.lrc[0]
        if c is None:
            continue
        effective += 1
        px, py = float(inst.xs[c - 1]), float(inst.ys[c - 1])
        if rect[0] <= px <= rect[1] and rect[2] <= py <= rect[3]:
            hits += 1
    # Source direction varies per trial; condition on it by using the mean
    # prediction over the drawn sources is messy, so place d = 0.5 and accept
    # the tiny variation: predict with the final source position and widen to
    # 5 sigma.  The strict quadrature validation runs in the experiments
    # module where the node position is held fixed.
    dom = Domain(R)
    num = region_area_minus_ball(dom, rect, source, r)
    den = region_area_minus_ball(dom, (0, R, 0, R), source, r)
    p = num / den
    sigma = math.sqrt(p * (1 - p) / effective)
    assert abs(hits / effective - p) < 5 * sigma + 0.02


# ---------------------------------------------------------------- local contacts


def brute_force_contacts(inst, node):
    p = inst.point(node)
    out = []
    for j in range(inst.n):
        q = Point(float(inst.xs[j]), float(inst.ys[j]))
        if node.tag == "relay" and node.index == j + 1:
            continue
        if dist(p, q) < inst.config.r:
            out.append(NodeRef("relay", j + 1))
    if node.tag != "source" and dist(p, inst.source) < inst.config.r:
        out.append(SOURCE)
    if node.tag != "target" and dist(p, inst.target) < inst.config.r:
        out.append(TARGET)
    return out


def test_local_contacts_matches_brute_force():
    for seed in range(30):
        inst = make_instance(seed=seed, n=120, R=6.0, d=1.7)
        for node in (SOURCE, TARGET, NodeRef("relay", 1), NodeRef("relay", 60)):
            fast = local_contacts(inst, node)
            slow = brute_force_contacts(inst, node)
            assert sorted((c.tag, c.index) for c in fast) == sorted(
                (c.tag, c.index) for c in slow
            )
            assert node not in fast


def test_local_contacts_symmetry():
    inst = make_instance(seed=4, n=150, R=6.0, d=2.0)
    for i in range(1, 40):
        a = NodeRef("relay", i)
        for b in local_contacts(inst, a):
            if b.tag == "relay":
                assert a in local_contacts(inst, b)


def test_local_contacts_isolated_node():
    cfg = NetworkConfig(R=10, r=1, delta=0.1, n=2, seed=1)
    inst = NetworkInstance(
        config=cfg,
        d=4.0,
        xs=np.array([1.0, 9.0]),
        ys=np.array([1.0, 9.0]),
        source=Point(5.0, 1.0),
        target=Point(5.0, 5.0),
    )
    assert local_contacts(inst, NodeRef("relay", 1)) == []


# ---------------------------------------------------------------- dump/replay


def test_instance_json_roundtrip():
    inst = make_instance(seed=23, n=40, R=6.0, d=1.5)
    text = inst.to_json()
    back = NetworkInstance.from_json(text)
    assert np.array_equal(back.xs, inst.xs)
    assert back.lrc == inst.lrc
    assert back.source == inst.source
    assert json.loads(text)["config"]["n"] == 40
