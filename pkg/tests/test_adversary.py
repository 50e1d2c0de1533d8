import logging

import numpy as np
import pytest

from fanetsim.adversary import (AttackConfig, AttackerSelectionError, BlackholeNode,
                                DroppingNode, FloodingNode, SinkholeNode, attacker_count,
                                blackhole_behavior, round_half_up, select_attackers,
                                snapshot_active_relays)
from fanetsim.aodv import DataPacket, Rrep, Rreq
from fanetsim.engine import RngStream
from fanetsim.harness.config import ScenarioConfig
from fanetsim.harness.run import active_relays, run_scenario
from fanetsim.medium import RREP, RREQ
from fanetsim.oracles import static_network
from fanetsim.workload import FLOW_LEG, Flow


def chain(n, spacing=200.0):
    return [(i * spacing, 0.0, 0.0) for i in range(n)]


def attacker_net(positions, kind, attackers, attack=None, **kw):
    attack = attack or AttackConfig(kind, 0.1)
    rng = RngStream(0, "attack")

    def factory(i, net):
        if i not in attackers:
            return None
        cls = {"sinkhole": SinkholeNode, "blackhole": BlackholeNode}.get(kind)
        if cls:
            return cls(i, net, net.aodv_cfg, attack)
        return {"dropping": DroppingNode, "flooding": FloodingNode}[kind](
            i, net, net.aodv_cfg, attack, rng)

    return static_network(positions, node_factory=factory, **kw)


# selection ---------------------------------------------------------------

@pytest.mark.parametrize("n, ratio, k", [(25, 0.05, 1), (50, 0.10, 5), (25, 0.0, 0),
                                         (25, 0.25, 6), (50, 0.25, 13), (25, 0.10, 3)])
def test_attacker_count(n, ratio, k):
    assert attacker_count(n, ratio) == k


def test_round_half_up():
    assert [round_half_up(x) for x in (1.25, 2.5, 3.5, 0.49)] == [1, 3, 4, 0]


FLOWS = [Flow(2 * i, 2 * i + 1) for i in range(10)]


def test_ratio_zero_is_empty():
    assert select_attackers(range(50), FLOWS, AttackConfig("sinkhole", 0.0),
                            RngStream(1, "a"), gbs=49) == frozenset()


def test_sets_exclude_endpoints_and_gbs_and_nest():
    prev = frozenset()
    for ratio in (0.05, 0.10, 0.15, 0.20, 0.25):
        s = select_attackers(range(50), FLOWS, AttackConfig("blackhole", ratio),
                             RngStream(3, "a"), gbs=49)
        assert len(s) == attacker_count(50, ratio)
        assert not s & set(range(20)) and 49 not in s
        assert prev <= s
        prev = s


def test_pool_too_small():
    with pytest.raises(AttackerSelectionError):
        select_attackers(range(25), FLOWS, AttackConfig("sinkhole", 0.25),
                         RngStream(0, "a"), gbs=24)


def test_relays_come_first():
    relays = {30, 31}
    s = select_attackers(range(50), FLOWS, AttackConfig("dropping", 0.02,
                         placement="on_active_route"), RngStream(0, "a"), gbs=49,
                         relays=relays)
    assert s <= relays
    assert len(s) == 1
    big = select_attackers(range(50), FLOWS, AttackConfig("dropping", 0.05,
                           placement="on_active_route"), RngStream(0, "a"), gbs=49,
                           relays=relays)
    assert relays <= big


def test_snapshot_chain():
    net = static_network(chain(4))
    flows = [Flow(0, 3, start=0.0, stop=5.0)]
    net.add_flows(flows)
    net.run(2.0)
    assert snapshot_active_relays(net, flows) == {1, 2}


def test_snapshot_single_hop_falls_back(caplog):
    net = static_network(chain(2))
    flows = [Flow(0, 1, start=0.0, stop=5.0)]
    net.add_flows(flows)
    net.run(2.0)
    relays = snapshot_active_relays(net, flows)
    assert relays == set()
    cfg = AttackConfig("dropping", 0.5, placement="on_active_route")
    with caplog.at_level(logging.WARNING):
        s = select_attackers(range(6), flows, cfg, RngStream(0, "a"), relays=relays)
    assert len(s) == 3
    assert "falling back" in caplog.text


def test_default_scale_snapshot_nonempty():
    hits = 0
    for seed in range(1, 11):
        cfg = ScenarioConfig(seed=seed, nodes=50, alpha=0.25 + 0.05 * (seed - 1))
        hits += bool(active_relays(cfg))
    print(f"non-empty relay snapshots: {hits}/10")
    assert hits >= 9


# sinkhole ----------------------------------------------------------------

def test_fake_rrep_fields():
    net = attacker_net(chain(3), "sinkhole", {1})
    s = net.nodes[1]
    assert s.handle_rreq(Rreq(0, 1, 1, 2, 7, 0), 0) == "fake-reply"
    rrep = net.medium.sending[1].payload
    assert (rrep.dest_seq, rrep.hop_count, rrep.destination) == (107, 1, 2)
    assert s.handle_rreq(Rreq(0, 1, 1, 2, 7, 0), 0) == "duplicate"
    assert s.fake_rreps == 1


def test_fake_route_beats_honest_route():
    net = static_network(chain(3))
    a = net.nodes[0]
    a.handle_rrep(Rrep(2, 8, 0, 2, 6.0), 1)
    assert a.routes[2].hop_count == 3
    a.handle_rrep(Rrep(2, 107, 0, 1, 6.0), 5)
    r = a.routes[2]
    assert (r.dest_seq, r.hop_count, r.next_hop) == (107, 2, 5)


def test_sinkhole_attracts_and_forwards():
    # S - X - D with X the sinkhole: it answers, then relays honestly
    net = attacker_net(chain(3), "sinkhole", {1})
    net.add_flows([Flow(0, 2, start=0.0, stop=20.0)])
    net.run(20.0)
    rep = net.finish()
    assert net.nodes[1].fake_rreps >= 1
    assert rep.drops_attacker == 0
    assert rep.app_packets_received >= 18


def test_adjacent_sinkholes_do_not_trap_each_other():
    from fanetsim.adversary import Collusion
    shared = Collusion()
    attack = AttackConfig("sinkhole", 0.1)

    def factory(i, net):
        return SinkholeNode(i, net, net.aodv_cfg, attack, shared) if i in (1, 2) else None

    net = static_network(chain(4), node_factory=factory)
    net.add_flows([Flow(0, 3, start=0.0, stop=30.0)])
    net.run(30.0)
    rep = net.finish()
    assert rep.drops_ttl == 0
    assert rep.app_packets_received >= 28
    assert net.nodes[1].fake_rreps >= 1


def test_sinkhole_at_destination_is_honest():
    net = attacker_net(chain(2), "sinkhole", {1})
    assert net.nodes[1].handle_rreq(Rreq(0, 1, 1, 1, 0, 0), 0) == "reply"


# dropping ----------------------------------------------------------------

def _relay(net, node, n):
    dropped = 0
    for k in range(n):
        pkt = DataPacket(0, 2, 0, FLOW_LEG, 0.0, 32)
        dropped += node.drop_data(pkt)
    return dropped


@pytest.mark.parametrize("p, lo, hi", [(1.0, 1.0, 1.0), (0.0, 0.0, 0.0), (0.5, 0.48, 0.52)])
def test_drop_probability(p, lo, hi):
    net = attacker_net(chain(3), "dropping", {1}, AttackConfig("dropping", 0.1,
                                                             drop_probability=p))
    frac = _relay(net, net.nodes[1], 10_000) / 10_000
    assert lo <= frac <= hi


def test_dropping_node_drops_on_path():
    net = attacker_net(chain(3), "dropping", {1})
    net.add_flows([Flow(0, 2, start=0.0, stop=20.0)])
    net.run(20.0)
    rep = net.finish()
    assert rep.app_packets_received == 0
    assert rep.drops_attacker == 20


def test_zero_probability_matches_honest():
    def run(factory_kind):
        if factory_kind:
            net = attacker_net(chain(4), "dropping", {1},
                               AttackConfig("dropping", 0.1, drop_probability=0.0))
        else:
            net = static_network(chain(4))
        net.add_flows([Flow(0, 3, start=0.0, stop=30.0)])
        net.run(30.0)
        return net.finish()
    assert run(True) == run(False)


# blackhole ---------------------------------------------------------------

def test_blackhole_composition():
    net = attacker_net(chain(3), "blackhole", {1})
    b = net.nodes[1]
    intercept, drop = blackhole_behavior(b)
    assert intercept(Rreq(0, 1, 1, 2, 0, 0), 0, True) == "fake-reply"
    assert net.medium.sending[1].kind == RREP
    assert drop(DataPacket(0, 2, 0, FLOW_LEG, 0.0, 32))


def test_blackhole_swallows_flow():
    # the honest path S-A-D is out-raced by the forged one-hop reply
    pos = [(0, 0, 0), (200, 100, 0), (400, 0, 0), (200, -100, 0)]
    net = attacker_net(pos, "blackhole", {3})
    net.add_flows([Flow(0, 2, start=0.0, stop=30.0)])
    net.run(30.0)
    rep = net.finish()
    assert rep.drops_attacker > 0
    assert rep.app_packets_received < rep.app_packets_sent


# flooding ----------------------------------------------------------------

def test_flooding_schedule_counts():
    net = attacker_net([(0, 0, 0), (5000, 0, 0), (9000, 0, 0)], "flooding", {0},
                       end_time=1800.0)
    f = net.nodes[0]
    f.start()
    net.run(1800.0)
    assert f.bursts == 597
    assert f.flood_rreqs == 5970
    assert f.rreqs_originated == 5970


def test_flood_burst_uses_fresh_ids():
    log = []
    net = attacker_net([(0, 0, 0), (100, 0, 0)], "flooding", {0}, end_time=11.0,
                       frame_log=log)
    seen = []
    orig = net.nodes[1].handle_rreq
    net.nodes[1].handle_rreq = lambda r, s: (seen.append((r.originator, r.rreq_id)), orig(r, s))[1]
    net.nodes[0].start()
    net.run(11.0)
    assert len(seen) == 10 and len(set(seen)) == 10


def test_flood_targets_exist_and_skip_self():
    net = attacker_net(chain(5), "flooding", {2})
    picks = {net.nodes[2].pick_target() for _ in range(500)}
    assert picks == {0, 1, 3, 4}


# scenario level ------------------------------------------------------------

@pytest.mark.parametrize("kind", ["sinkhole", "dropping", "blackhole", "flooding"])
def test_ratio_zero_is_noop(kind):
    base = ScenarioConfig(seed=4, nodes=25, sim_time=120.0, area_x=900, area_y=900)
    a = run_scenario(base)
    b = run_scenario(base.with_(attack=kind, ratio=0.0))
    assert a.row() | {"attack": kind} == b.row() | {"attack": kind}
    assert a.report == b.report
    assert b.attackers == frozenset()


def test_default_scale_sinkhole_example(default_grid):
    agg, _, _ = default_grid(64)
    base = agg.get(50, "none", "random", 0.0)
    sink = agg.get(50, "sinkhole", "random", 0.25)
    print(f"baseline pdr={base.pdr:.4f} e2e={base.e2e:.4f}; "
          f"sinkhole@25% pdr={sink.pdr:.4f} e2e={sink.e2e:.4f}")
    assert abs(sink.pdr - base.pdr) <= 0.01
    assert sink.e2e > base.e2e
