"""Reactive AODV routing.

Implemented subset: network-wide RREQ flood with duplicate suppression,
destination and intermediate-node RREP, route selection by highest
destination sequence number then fewest hops, RERR on link break and on
missing routes at relays, bounded per-destination buffering during
discovery with retries. No HELLO, no expanding ring, no local repair, no
gratuitous RREP, no precursor lists (RERR is a local broadcast that only
nodes routing through the sender act on).

A duplicate RREQ that arrived over strictly fewer hops than every earlier
copy is treated as an improvement: the reverse route is shortened and the
node repeats its action (rebroadcast or reply). The destination answers
such improvements with the same sequence number it used for the first
reply, so the originator keeps the shortest of the equally fresh routes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .medium import BROADCAST, DATA, RERR, RREP, RREQ, Frame

@dataclass(frozen=True)
class AodvConfig:
    active_route_timeout: float = 3.0
    seen_cache_lifetime: float = 3.0
    pending_capacity: int = 32
    ttl: int = 32
    rreq_retries: int = 2
    net_traversal_time: float = 2.8
    payload_size: int = 512
    improved_rreq: bool = True


@dataclass(slots=True)
class RouteEntry:
    destination: int
    next_hop: int
    hop_count: int
    dest_seq: int
    expiry: float
    valid: bool = True

    def active(self, now: float) -> bool:
        return self.valid and self.expiry > now


@dataclass(slots=True, frozen=True)
class Rreq:
    originator: int
    orig_seq: int
    rreq_id: int
    destination: int
    last_known_dest_seq: int
    hop_count: int


@dataclass(slots=True, frozen=True)
class Rrep:
    destination: int
    dest_seq: int
    originator: int
    hop_count: int
    lifetime: float


@dataclass(slots=True, frozen=True)
class Rerr:
    unreachable: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.unreachable:
            raise ValueError("RERR needs at least one unreachable destination")


class DataPacket:
    __slots__ = ("src", "dst", "flow", "leg", "created", "ttl", "hops")

    def __init__(self, src, dst, flow, leg, created, ttl):
        self.src = src
        self.dst = dst
        self.flow = flow
        self.leg = leg
        self.created = created
        self.ttl = ttl
        self.hops = 0

    def __repr__(self):
        return f"DataPacket({self.src}->{self.dst}, flow={self.flow}/{self.leg}, ttl={self.ttl})"


class RreqSeenCache:
    """``(originator, rreq_id)`` pairs seen recently, with the best hop count."""

    def __init__(self, lifetime: float):
        self.lifetime = lifetime
        self._entries: dict[tuple[int, int], list] = {}
        self._next_purge = 0.0

    def lookup(self, key, now):
        e = self._entries.get(key)
        if e is None or e[0] <= now:
            return None
        return e

    def add(self, key, hops, now):
        if now >= self._next_purge:
            self._purge(now)
        e = self._entries.get(key)
        if e is None or e[0] <= now:
            e = self._entries[key] = [now + self.lifetime, hops, None]
        else:
            e[1] = hops
        return e

    def _purge(self, now):
        self._entries = {k: e for k, e in self._entries.items() if e[0] > now}
        self._next_purge = now + self.lifetime

    def __contains__(self, key):
        return key in self._entries

    def __len__(self):
        return len(self._entries)


class AodvNode:
    """Honest AODV agent for one node.

    ``net`` supplies ``sim``, ``medium``, ``medium_cfg``, ``metrics`` and
    the ``deliver(node, packet)`` callback for packets that reach their
    destination.
    """

    attacker = False

    def __init__(self, node_id: int, net, cfg: AodvConfig):
        self.id = node_id
        self.net = net
        self.cfg = cfg
        self.seq = 0
        self.rreq_id = 0
        self.routes: dict[int, RouteEntry] = {}
        self.seen = RreqSeenCache(cfg.seen_cache_lifetime)
        self.pending: dict[int, deque] = {}
        self.discovery: dict[int, object] = {}
        self.rreqs_originated = 0
        self.rreps_dropped = 0

    # route table ----------------------------------------------------------
    def valid_route(self, dest: int) -> RouteEntry | None:
        r = self.routes.get(dest)
        if r is None or not r.valid:
            return None
        if r.expiry <= self.net.sim.now:
            r.valid = False
            return None
        return r

    def update_route(self, dest, next_hop, hops, seq, lifetime=None) -> bool:
        """Install a candidate route if it is fresher, or as fresh and shorter."""
        now = self.net.sim.now
        expiry = now + (self.cfg.active_route_timeout if lifetime is None else lifetime)
        r = self.routes.get(dest)
        if r is None:
            self.routes[dest] = RouteEntry(dest, next_hop, hops, seq, expiry)
        elif seq > r.dest_seq or (seq == r.dest_seq and (hops < r.hop_count or not r.active(now))):
            r.next_hop, r.hop_count, r.dest_seq = next_hop, hops, seq
            r.expiry, r.valid = expiry, True
        elif seq == r.dest_seq and hops == r.hop_count and next_hop == r.next_hop:
            r.expiry = max(r.expiry, expiry)
            return False
        else:
            return False
        if dest in self.pending or dest in self.discovery:
            self._route_available(dest)
        return True

    def _route_available(self, dest):
        ev = self.discovery.pop(dest, None)
        if ev is not None:
            ev.cancel()
        r = self.valid_route(dest)
        if r is None:
            return
        buf = self.pending.pop(dest, None)
        if buf:
            for pkt in buf:
                self._unicast_data(pkt, r)

    # sending ----------------------------------------------------------------
    def _send(self, kind, payload, link_dst):
        mc = self.net.medium_cfg
        size = mc.frame_size(kind, self.cfg.payload_size if kind == DATA else 0)
        return self.net.medium.enqueue(self.id, Frame(kind, size, self.id, link_dst, payload))

    def _unicast_data(self, pkt, route):
        route.expiry = max(route.expiry, self.net.sim.now + self.cfg.active_route_timeout)
        self._send(DATA, pkt, route.next_hop)

    def send_data(self, pkt: DataPacket) -> str:
        r = self.valid_route(pkt.dst)
        if r is not None:
            self._unicast_data(pkt, r)
            return "forwarded"
        self._buffer(pkt)
        self.originate_rreq(pkt.dst)
        return "queued-pending-route"

    def _buffer(self, pkt):
        buf = self.pending.get(pkt.dst)
        if buf is None:
            buf = self.pending[pkt.dst] = deque()
        if len(buf) >= self.cfg.pending_capacity:
            self.net.metrics.packet_fate(buf.popleft(), "overflow")
        buf.append(pkt)

    def originate_rreq(self, dest: int) -> bool:
        if dest in self.discovery:
            return False
        self._send_rreq(dest, 0)
        return True

    def _make_rreq(self, dest):
        self.seq += 1
        self.rreq_id += 1
        r = self.routes.get(dest)
        rreq = Rreq(self.id, self.seq, self.rreq_id, dest, r.dest_seq if r else 0, 0)
        self.seen.add((self.id, self.rreq_id), 0, self.net.sim.now)
        self.rreqs_originated += 1
        return rreq

    def _send_rreq(self, dest, attempt):
        self._send(RREQ, self._make_rreq(dest), BROADCAST)
        wait = self.cfg.net_traversal_time * (2 ** attempt)
        self.discovery[dest] = self.net.sim.schedule(
            self.net.sim.now + wait, self._rreq_timeout, dest, attempt)

    def _rreq_timeout(self, dest, attempt):
        if self.valid_route(dest) is not None:
            self._route_available(dest)
            return
        if attempt < self.cfg.rreq_retries:
            self._send_rreq(dest, attempt + 1)
            return
        self.discovery.pop(dest, None)
        for pkt in self.pending.pop(dest, ()):
            self.net.metrics.packet_fate(pkt, "no_route")

    # receiving ----------------------------------------------------------
    def receive(self, frame: Frame, sender: int) -> None:
        kind = frame.kind
        if kind == DATA:
            self.net.metrics.data_received += 1
            self.on_data(frame.payload, sender)
            return
        self.net.metrics.control_received += 1
        if kind == RREQ:
            self.handle_rreq(frame.payload, sender)
        elif kind == RREP:
            self.handle_rrep(frame.payload, sender)
        elif kind == RERR:
            self.handle_rerr(frame.payload, sender)

    def handle_rreq(self, rreq: Rreq, sender: int) -> str:
        if rreq.originator == self.id:
            return "own"
        now = self.net.sim.now
        key = (rreq.originator, rreq.rreq_id)
        hops = rreq.hop_count + 1
        entry = self.seen.lookup(key, now)
        if entry is not None and (not self.cfg.improved_rreq or hops >= entry[1]):
            return "duplicate"
        first = entry is None
        entry = self.seen.add(key, hops, now)
        self.update_route(rreq.originator, sender, hops, rreq.orig_seq)
        intercepted = self.intercept_rreq(rreq, sender, first)
        if intercepted:
            return intercepted
        if rreq.destination == self.id:
            if entry[2] is None:
                self.seq = max(self.seq, rreq.last_known_dest_seq) + 1
                entry[2] = self.seq
            rrep = Rrep(self.id, entry[2], rreq.originator, 0, 2 * self.cfg.active_route_timeout)
            self._send(RREP, rrep, sender)
            return "reply"
        r = self.valid_route(rreq.destination)
        if r is not None and r.dest_seq >= rreq.last_known_dest_seq:
            rrep = Rrep(rreq.destination, r.dest_seq, rreq.originator, r.hop_count, r.expiry - now)
            self._send(RREP, rrep, sender)
            return "intermediate-reply"
        fwd = Rreq(rreq.originator, rreq.orig_seq, rreq.rreq_id, rreq.destination,
                   rreq.last_known_dest_seq, hops)
        self._send(RREQ, fwd, BROADCAST)
        return "rebroadcast"

    def intercept_rreq(self, rreq: Rreq, sender: int, first: bool):
        """Hook for attack overlays; return a truthy action name to stop processing."""
        return None

    def handle_rrep(self, rrep: Rrep, sender: int) -> str:
        hops = rrep.hop_count + 1
        changed = self.update_route(rrep.destination, sender, hops, rrep.dest_seq, rrep.lifetime)
        if rrep.originator == self.id:
            return "installed" if changed else "ignored"
        if not changed:
            return "stale"
        rev = self.valid_route(rrep.originator)
        if rev is None:
            self.rreps_dropped += 1
            self.net.metrics.rrep_dropped += 1
            return "dropped"
        rev.expiry = max(rev.expiry, self.net.sim.now + self.cfg.active_route_timeout)
        self._send(RREP, Rrep(rrep.destination, rrep.dest_seq, rrep.originator, hops,
                              rrep.lifetime), rev.next_hop)
        return "forwarded"

    def handle_rerr(self, rerr: Rerr, sender: int) -> list:
        now = self.net.sim.now
        lost = []
        for dest, seq in rerr.unreachable:
            r = self.routes.get(dest)
            if r is not None and r.active(now) and r.next_hop == sender:
                r.valid = False
                r.dest_seq = max(r.dest_seq, seq)
                lost.append((dest, r.dest_seq))
        if lost:
            self._send(RERR, Rerr(tuple(lost)), BROADCAST)
        return lost

    def handle_link_break(self, broken_next_hop: int) -> list:
        now = self.net.sim.now
        lost = []
        for dest, r in self.routes.items():
            if r.next_hop == broken_next_hop and r.active(now):
                r.valid = False
                r.dest_seq += 1
                lost.append((dest, r.dest_seq))
        if lost:
            self._send(RERR, Rerr(tuple(lost)), BROADCAST)
        return lost

    # data ------------------------------------------------------------------
    def on_data(self, pkt: DataPacket, sender: int) -> None:
        pkt.hops += 1
        if pkt.dst == self.id:
            self.net.deliver(self, pkt)
            return
        if self.drop_data(pkt):
            self.net.metrics.packet_fate(pkt, "attacker")
            return
        self.forward_data(pkt)

    def drop_data(self, pkt: DataPacket) -> bool:
        """Hook for attack overlays; honest nodes never drop."""
        return False

    def forward_data(self, pkt: DataPacket) -> str:
        pkt.ttl -= 1
        if pkt.ttl <= 0:
            self.net.metrics.packet_fate(pkt, "ttl")
            return "ttl-expired"
        r = self.valid_route(pkt.dst)
        if r is None:
            return self.no_route(pkt)
        back = self.valid_route(pkt.src)
        if back is not None:
            back.expiry = max(back.expiry, self.net.sim.now + self.cfg.active_route_timeout)
        self._unicast_data(pkt, r)
        return "forwarded"

    def no_route(self, pkt: DataPacket) -> str:
        self.net.metrics.packet_fate(pkt, "no_route")
        r = self.routes.get(pkt.dst)
        self._send(RERR, Rerr(((pkt.dst, r.dest_seq if r else 0),)), BROADCAST)
        return "dropped-no-route"

    def route_table_rows(self, now: float):
        for dest in sorted(self.routes):
            r = self.routes[dest]
            yield (now, self.id, dest, r.next_hop, r.hop_count, r.dest_seq, int(r.active(now)))
