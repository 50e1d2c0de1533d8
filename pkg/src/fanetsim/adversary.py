"""Routing attacks layered on the honest AODV agent, and attacker selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .aodv import AodvNode, DataPacket, Rrep, Rreq
from .medium import BROADCAST, RREP, RREQ

log = logging.getLogger(__name__)

ATTACK_KINDS = ("none", "sinkhole", "dropping", "blackhole", "flooding")
PLACEMENTS = ("random", "on_active_route")


@dataclass(frozen=True)
class AttackConfig:
    kind: str = "none"
    attacker_ratio: float = 0.0
    placement: str = "random"
    drop_probability: float = 1.0
    seq_boost: int = 100
    flood_burst: int = 10
    flood_period: float = 3.0
    flood_start: float = 10.0
    flood_nonexistent_targets: bool = False
    snapshot_time: float = 20.0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.placement!r}")
        if not 0.0 <= self.attacker_ratio <= 1.0:
            raise ValueError("attacker_ratio must lie in [0, 1]")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError("drop_probability must lie in [0, 1]")
        if self.flood_burst < 1 or self.flood_period <= 0:
            raise ValueError("flood_burst >= 1 and flood_period > 0 required")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.attacker_ratio > 0


class AttackerSelectionError(ValueError):
    pass


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + 1e-9))


def attacker_count(total_nodes: int, ratio: float) -> int:
    if ratio <= 0:
        return 0
    return max(1, round_half_up(total_nodes * ratio))


def attacker_order(eligible, rng, relays=None) -> list[int]:
    """Preference order over eligible nodes; attacker sets are its prefixes.

    With ``relays`` the snapshot relays come first (in random order) and the
    rest of the pool follows, so sets stay nested across ratios.
    """
    eligible = sorted(eligible)
    if relays is None:
        return rng.permutation(eligible)
    first = [v for v in sorted(relays) if v in set(eligible)]
    rest = [v for v in eligible if v not in set(first)]
    return rng.permutation(first) + rng.permutation(rest)


def select_attackers(all_nodes, flows, cfg: AttackConfig, rng, gbs=None,
                     relays=None) -> frozenset[int]:
    """Fixed attacker set for one run.

    ``flows`` is any iterable of objects with ``source``/``destination``.
    For ``on_active_route`` placement pass the relay snapshot as ``relays``;
    an empty snapshot falls back to random placement.
    """
    all_nodes = list(all_nodes)
    endpoints = set()
    for f in flows:
        endpoints.add(f.source)
        endpoints.add(f.destination)
    eligible = [v for v in all_nodes if v not in endpoints and v != gbs]
    k = attacker_count(len(all_nodes), cfg.attacker_ratio)
    if k == 0 or cfg.kind == "none":
        return frozenset()
    if len(eligible) < k:
        raise AttackerSelectionError(
            f"need {k} attackers but only {len(eligible)} eligible nodes")
    if cfg.placement == "on_active_route":
        if not relays:
            log.warning("no relays on active routes; falling back to random placement")
            relays = None
        order = attacker_order(eligible, rng, relays)
    else:
        order = attacker_order(eligible, rng)
    return frozenset(order[:k])


def snapshot_active_relays(net, flows, exclude=()) -> set[int]:
    """Nodes that currently relay traffic of any flow.

    Walks the installed next hops from each flow source to its destination,
    and from each destination to the base station.
    """
    now = net.sim.now
    skip = set(exclude)
    for f in flows:
        skip.add(f.source)
        skip.add(f.destination)
    relays = set()
    legs = [(f.source, f.destination) for f in flows]
    if net.gbs is not None:
        legs += [(f.destination, net.gbs) for f in flows]
    for src, dst in legs:
        u, seen = src, {src}
        while u != dst:
            r = net.nodes[u].routes.get(dst)
            if r is None or not r.active(now) or r.next_hop in seen:
                break
            u = r.next_hop
            seen.add(u)
            if u != dst and u not in skip:
                relays.add(u)
    relays.discard(net.gbs)
    return relays


class Collusion:
    """State the attackers of one run share: who they are and what they forged."""

    def __init__(self, members=()):
        self.members = set(members)
        self.forged: dict[int, set] = {}

    def record(self, dest, seq):
        self.forged.setdefault(dest, set()).add(seq)

    def is_forged(self, dest, seq):
        return seq in self.forged.get(dest, ())

    def ceiling(self, dest):
        seqs = self.forged.get(dest)
        return max(seqs) if seqs else None


class SinkholeNode(AodvNode):
    """Answers every RREQ with a forged, fresher one-hop RREP.

    Attracted data is still forwarded, using honest route discovery when
    the attacker has no real route. Attackers collude so they do not trap
    each other: they never forge replies to a fellow attacker, they refuse
    routes carrying a forged sequence number, and their own discovery asks
    for a number above every forgery so only a genuine route can answer.
    """

    attacker = True

    def __init__(self, node_id, net, cfg, attack: AttackConfig, collusion=None):
        super().__init__(node_id, net, cfg)
        self.attack = attack
        self.collusion = collusion if collusion is not None else Collusion()
        self.collusion.members.add(node_id)
        self.fake_rreps = 0

    def sinkhole_on_rreq(self, rreq: Rreq) -> Rrep:
        seq = rreq.last_known_dest_seq + self.attack.seq_boost
        self.collusion.record(rreq.destination, seq)
        return Rrep(rreq.destination, seq, rreq.originator, 1, 2 * self.cfg.active_route_timeout)

    def update_route(self, dest, next_hop, hops, seq, lifetime=None) -> bool:
        if self.collusion.is_forged(dest, seq):
            return False
        return super().update_route(dest, next_hop, hops, seq, lifetime)

    def _make_rreq(self, dest):
        rreq = super()._make_rreq(dest)
        top = self.collusion.ceiling(dest)
        if top is not None and top >= rreq.last_known_dest_seq:
            rreq = Rreq(rreq.originator, rreq.orig_seq, rreq.rreq_id, dest, top + 1, 0)
        return rreq

    def intercept_rreq(self, rreq, sender, first):
        if rreq.destination == self.id or rreq.originator in self.collusion.members:
            return None
        if first:
            self.fake_rreps += 1
            self._send(RREP, self.sinkhole_on_rreq(rreq), sender)
            return "fake-reply"
        return "suppressed"

    def no_route(self, pkt: DataPacket) -> str:
        self._buffer(pkt)
        self.originate_rreq(pkt.dst)
        return "queued-pending-route"


class DroppingNode(AodvNode):
    """Routes honestly but drops relayed data with ``drop_probability``.

    ``drop_probability`` below 1 gives grayhole behaviour. Control traffic
    is never dropped.
    """

    attacker = True

    def __init__(self, node_id, net, cfg, attack: AttackConfig, rng):
        super().__init__(node_id, net, cfg)
        self.attack = attack
        self.rng = rng
        self.dropped = 0

    def drop_data(self, pkt):
        p = self.attack.drop_probability
        if p >= 1.0 or (p > 0.0 and self.rng.uniform() < p):
            self.dropped += 1
            return True
        return False


def dropping_on_data(node: DroppingNode, pkt) -> str:
    return "drop" if node.drop_data(pkt) else "forward"


class BlackholeNode(SinkholeNode):
    """Sinkhole that drops every data packet it attracts."""

    def drop_data(self, pkt):
        return True


def blackhole_behavior(node: BlackholeNode) -> tuple:
    return (node.intercept_rreq, node.drop_data)


class FloodingNode(AodvNode):
    """Broadcasts bursts of RREQs for a random destination every period."""

    attacker = True

    def __init__(self, node_id, net, cfg, attack: AttackConfig, rng):
        super().__init__(node_id, net, cfg)
        self.attack = attack
        self.rng = rng
        self.bursts = 0
        self.flood_rreqs = 0

    def start(self):
        self.net.sim.schedule(max(self.attack.flood_start, self.net.sim.now),
                              self.flooding_tick)

    def pick_target(self) -> int:
        if self.attack.flood_nonexistent_targets:
            return self.net.n + self.rng.integer(0, self.net.n - 1)
        while True:
            t = self.rng.integer(0, self.net.n - 1)
            if t != self.id:
                return t

    def flooding_tick(self):
        dest = self.pick_target()
        for _ in range(self.attack.flood_burst):
            self._send(RREQ, self._make_rreq(dest), BROADCAST)
            self.flood_rreqs += 1
        self.bursts += 1
        nxt = self.net.sim.now + self.attack.flood_period
        if nxt <= self.net.end_time:
            self.net.sim.schedule(nxt, self.flooding_tick)


def make_attacker(kind, node_id, net, cfg, attack: AttackConfig, rng, collusion=None):
    if kind == "sinkhole":
        return SinkholeNode(node_id, net, cfg, attack, collusion)
    if kind == "blackhole":
        return BlackholeNode(node_id, net, cfg, attack, collusion)
    if kind == "dropping":
        return DroppingNode(node_id, net, cfg, attack, rng)
    if kind == "flooding":
        return FloodingNode(node_id, net, cfg, attack, rng)
    raise ValueError(f"no attacker overlay for {kind!r}")
