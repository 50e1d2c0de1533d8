import numpy as np
import pytest

from fanetsim.aodv import AodvConfig, AodvNode, DataPacket, Rerr, Rrep, Rreq, RreqSeenCache
from fanetsim.medium import DATA, RERR, RREP, RREQ
from fanetsim.oracles import (quiescence, shortest_path_oracle, static_chain_delivery,
                              static_network)
from fanetsim.workload import FLOW_LEG, Flow


def chain(n, spacing=200.0):
    return [(i * spacing, 0.0, 0.0) for i in range(n)]


def sent_frames(log, kind=None, node=None):
    return [r for r in log if r[2] == "tx" and (kind is None or r[3] == kind)
            and (node is None or r[1] == node)]


def packet(net, src, dst, flow=0):
    pkt = DataPacket(src, dst, flow, FLOW_LEG, net.sim.now, net.aodv_cfg.ttl)
    net.metrics.originate(pkt)
    return pkt


# route discovery -----------------------------------------------------------

def test_send_with_route_uses_next_hop_without_discovery():
    log = []
    net = static_network(chain(3), frame_log=log)
    a = net.nodes[0]
    a.update_route(2, 1, 2, 5)
    assert a.send_data(packet(net, 0, 2)) == "forwarded"
    assert a.rreqs_originated == 0
    assert net.medium.sending[0].link_dst == 1
    assert net.medium.sending[0].kind == DATA


def test_send_without_route_floods_once_and_holds():
    net = static_network(chain(4))
    a = net.nodes[0]
    for _ in range(5):
        assert a.send_data(packet(net, 0, 3)) == "queued-pending-route"
    assert a.rreqs_originated == 1
    assert len(a.pending[3]) == 5


def test_held_packets_flush_in_order_after_rrep():
    net = static_network(chain(4))
    got = []
    net.deliver = lambda node, pkt: got.append(pkt.created)
    a = net.nodes[0]
    for k in range(5):
        net.sim.schedule(k * 1e-3, lambda: a.send_data(packet(net, 0, 3)))
    net.run(2.0)
    assert a.rreqs_originated == 1
    assert 3 not in a.pending
    assert got == sorted(got) and len(got) == 5


def test_duplicate_rreq_discarded():
    net = static_network(chain(3))
    b = net.nodes[1]
    rreq = Rreq(0, 1, 1, 2, 0, 0)
    assert b.handle_rreq(rreq, 0) == "rebroadcast"
    assert b.handle_rreq(rreq, 0) == "duplicate"
    assert b.handle_rreq(Rreq(0, 1, 1, 2, 0, 3), 2) == "duplicate"


def test_improved_duplicate_disabled():
    net = static_network(chain(3), aodv_cfg=AodvConfig(improved_rreq=False))
    b = net.nodes[1]
    b.handle_rreq(Rreq(0, 1, 1, 2, 0, 4), 0)
    assert b.handle_rreq(Rreq(0, 1, 1, 2, 0, 0), 0) == "duplicate"


def test_destination_replies_with_incremented_seq():
    log = []
    net = static_network(chain(2), frame_log=log)
    d = net.nodes[1]
    d.seq = 3
    assert d.handle_rreq(Rreq(0, 1, 1, 1, 6, 0), 0) == "reply"
    rrep = net.medium.sending[1].payload
    assert isinstance(rrep, Rrep)
    assert rrep.hop_count == 0
    assert rrep.dest_seq == 7 and d.seq == 7


def test_intermediate_with_fresh_route_replies():
    # A - B - C - D with B already knowing D at seq 9; A asks with seq 7
    log = []
    net = static_network(chain(4), frame_log=log)
    b = net.nodes[1]
    b.update_route(3, 2, 2, 9)
    a = net.nodes[0]
    a.update_route(3, 1, 3, 7)
    a.routes[3].valid = False
    a.originate_rreq(3)
    net.run(0.5)
    rreps = sent_frames(log, "rrep")
    assert [r[1] for r in rreps] == [1]
    r = a.valid_route(3)
    assert r is not None and r.dest_seq == 9 and r.hop_count == 3 and r.next_hop == 1


def test_intermediate_with_stale_route_rebroadcasts():
    net = static_network(chain(3))
    b = net.nodes[1]
    b.update_route(2, 2, 1, 5)
    assert b.handle_rreq(Rreq(0, 1, 1, 2, 7, 0), 0) == "rebroadcast"


@pytest.mark.parametrize("stored, cand, replaced", [
    ((5, 3), (7, 5), True),
    ((7, 5), (7, 2), True),
    ((7, 2), (5, 1), False),
])
def test_route_replacement(stored, cand, replaced):
    net = static_network(chain(3))
    a = net.nodes[0]
    a.update_route(2, 1, stored[1], stored[0])
    changed = a.handle_rrep(Rrep(2, cand[0], 0, cand[1] - 1, 6.0), 1)
    r = a.routes[2]
    assert (changed == "installed") == replaced
    assert (r.dest_seq, r.hop_count) == (cand if replaced else stored)


def test_invalid_route_replaced_by_equal_seq():
    net = static_network(chain(3))
    a = net.nodes[0]
    a.update_route(2, 1, 2, 7)
    a.routes[2].valid = False
    assert a.update_route(2, 1, 4, 7)
    assert a.valid_route(2).hop_count == 4


def test_sequence_freshness_monotone():
    rng = np.random.default_rng(5)
    net = static_network(chain(3))
    a = net.nodes[0]
    last = -1
    for _ in range(500):
        a.update_route(2, 1, int(rng.integers(1, 10)), int(rng.integers(0, 50)))
        if rng.random() < 0.1:
            a.routes[2].valid = False
        assert a.routes[2].dest_seq >= last
        last = a.routes[2].dest_seq


# route maintenance ---------------------------------------------------------

@pytest.mark.parametrize("count", [1, 3])
def test_link_break_rerr_lists_every_lost_route(count):
    net = static_network(chain(6))
    a = net.nodes[0]
    for d in range(2, 2 + count):
        a.update_route(d, 1, d, 4)
    a.update_route(5, 9, 1, 1)  # unrelated next hop survives
    lost = a.handle_link_break(1)
    assert len(lost) == count
    frame = net.medium.sending[0]
    assert frame.kind == RERR and len(frame.payload.unreachable) == count
    assert all(not a.routes[d].valid for d in range(2, 2 + count))
    assert all(seq == 5 for _, seq in lost)
    assert a.routes[5].valid


def test_rerr_requires_entries():
    with pytest.raises(ValueError):
        Rerr(())


def test_rerr_invalidates_only_routes_through_sender():
    net = static_network(chain(3))
    a = net.nodes[0]
    a.update_route(2, 1, 2, 4)
    assert a.handle_rerr(Rerr(((2, 6),)), 5) == []
    assert a.handle_rerr(Rerr(((2, 6),)), 1) == [(2, 6)]
    assert not a.routes[2].valid


def test_delivery_resumes_around_broken_link():
    # diamond S-A-D and S-B-D; A leaves the area at t=5
    before = [(0, 0, 0), (200, 100, 0), (200, -100, 0), (400, 0, 0)]
    after = [(0, 0, 0), (5000, 5000, 0), (200, -100, 0), (400, 0, 0)]
    steps = [before] * 5 + [after] * 35
    net = static_network(steps, end_time=40.0)
    net.add_flows([Flow(0, 3, start=0.0, stop=40.0)])
    net.run(40.0)
    report = net.finish()
    late = net.metrics.fates[(0, FLOW_LEG)]["delivered"]
    assert report.app_packets_sent == 40
    assert late >= 36
    r = net.nodes[0].valid_route(3)
    assert r is not None and r.next_hop == 2


def test_forward_with_route_enqueues_once():
    net = static_network(chain(3))
    b = net.nodes[1]
    b.update_route(2, 2, 1, 3)
    pkt = packet(net, 0, 2)
    assert b.forward_data(pkt) == "forwarded"
    assert net.medium.stats[1].enqueued == 1
    assert pkt.ttl == net.aodv_cfg.ttl - 1


def test_forward_without_route_sends_rerr():
    net = static_network(chain(3))
    b = net.nodes[1]
    pkt = packet(net, 0, 2)
    assert b.forward_data(pkt) == "dropped-no-route"
    assert net.medium.sending[1].kind == RERR
    assert net.metrics.total("no_route") == 1


def test_routing_loop_dies_at_ttl():
    net = static_network(chain(3))
    a, b = net.nodes[0], net.nodes[1]
    a.update_route(2, 1, 2, 100, lifetime=1e9)
    b.update_route(2, 0, 2, 100, lifetime=1e9)
    a.send_data(packet(net, 0, 2))
    net.run(5.0)
    assert net.metrics.total("ttl") == 1
    assert net.metrics.data_received == 32  # one reception per TTL unit


def test_discovery_gives_up_after_retries():
    net = static_network([(0, 0, 0), (1000, 0, 0)])
    a = net.nodes[0]
    a.send_data(packet(net, 0, 1))
    net.run(30.0)
    assert a.rreqs_originated == 3
    assert net.metrics.total("no_route") == 1
    assert not a.pending and not a.discovery


def test_pending_buffer_overflow_drops_oldest():
    net = static_network([(0, 0, 0), (1000, 0, 0)])
    a = net.nodes[0]
    pkts = [packet(net, 0, 1) for _ in range(40)]
    for p in pkts:
        a.send_data(p)
    assert len(a.pending[1]) == 32
    assert a.pending[1][0] is pkts[8]
    assert net.metrics.total("overflow") == 8


def test_seen_cache_expires():
    c = RreqSeenCache(3.0)
    c.add((0, 1), 2, 0.0)
    assert c.lookup((0, 1), 2.9) is not None
    assert c.lookup((0, 1), 3.0) is None
    c.add((0, 2), 1, 10.0)
    assert (0, 1) not in c


# oracles -------------------------------------------------------------------

def test_hop_counts_match_bfs():
    res = shortest_path_oracle()
    print(res.line())
    assert res.checked > 5000
    assert res.failures == []


def test_static_chain_delivers():
    sent, got = static_chain_delivery()
    assert sent == 100
    assert got >= 98


def test_no_rreq_without_traffic():
    assert quiescence() == 0
