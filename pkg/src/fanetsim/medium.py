"""Shared wireless medium.

Unit-disc links, one transmission at a time per node, carrier sense over
the 1-hop neighbourhood with uniform random backoff, and a finite FIFO
transmit queue per node. There is no receiver-side collision model.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

BROADCAST = -1
SPEED_OF_LIGHT = 299_792_458.0

DATA, RREQ, RREP, RERR = "data", "rreq", "rrep", "rerr"
CONTROL_KINDS = frozenset((RREQ, RREP, RERR))


@dataclass(frozen=True)
class MediumConfig:
    range: float = 250.0
    bitrate: float = 11e6
    queue_capacity: int = 64
    backoff_max: float = 2e-3
    propagation: bool = False
    link_header: int = 48
    rreq_size: int = 24
    rrep_size: int = 20
    rerr_size: int = 12

    def __post_init__(self):
        if self.range <= 0 or self.bitrate <= 0:
            raise ValueError("range and bitrate must be positive")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be at least 1")
        if self.backoff_max <= 0:
            raise ValueError("backoff_max must be positive")

    def frame_size(self, kind: str, payload_bytes: int = 0) -> int:
        body = {RREQ: self.rreq_size, RREP: self.rrep_size, RERR: self.rerr_size}.get(kind, payload_bytes)
        return body + self.link_header

    def airtime(self, size_bytes: int) -> float:
        return size_bytes * 8.0 / self.bitrate


class Frame:
    __slots__ = ("kind", "size", "link_src", "link_dst", "payload", "enqueue_time")

    def __init__(self, kind, size, link_src, link_dst, payload, enqueue_time=0.0):
        if size <= 0:
            raise ValueError("frame size must be positive")
        if link_dst == BROADCAST and kind not in (RREQ, RERR):
            raise ValueError(f"{kind} frames are unicast only")
        self.kind = kind
        self.size = size
        self.link_src = link_src
        self.link_dst = link_dst
        self.payload = payload
        self.enqueue_time = enqueue_time

    def __repr__(self):
        return f"Frame({self.kind}, {self.link_src}->{self.link_dst}, {self.size}B)"


def neighbors(node: int, positions, range_m: float = 250.0) -> set[int]:
    """Nodes within ``range_m`` (inclusive) of ``node``, excluding itself."""
    pos = np.asarray(positions, dtype=float)
    d2 = np.sum((pos - pos[node]) ** 2, axis=1)
    hits = np.flatnonzero(d2 <= range_m * range_m)
    return {int(i) for i in hits if i != node}


def adjacency(positions, range_m: float = 250.0) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    adj = np.einsum("ijk,ijk->ij", diff, diff) <= range_m * range_m
    np.fill_diagonal(adj, False)
    return adj


class NodeStats:
    __slots__ = ("enqueued", "delivered", "dropped_overflow", "lost_range", "airtime")

    def __init__(self):
        self.enqueued = 0
        self.delivered = 0
        self.dropped_overflow = 0
        self.lost_range = 0
        self.airtime = 0.0


class Medium:
    """Per-node transmit queues over a time-varying unit-disc graph.

    ``receive(node, frame, sender)`` is called for each reception,
    ``link_break(node, next_hop, frame)`` when a unicast target is out of range
    at the end of the transmission and ``dropped(node, frame, reason)``
    whenever a frame leaves the system without being delivered.
    """

    def __init__(self, sim, trajectory, n_nodes: int, cfg: MediumConfig, rng,
                 receive, link_break, dropped, frame_log: list | None = None):
        self.sim = sim
        self.traj = trajectory
        self.n = n_nodes
        self.cfg = cfg
        self.rng = rng
        self.receive = receive
        self.link_break = link_break
        self.dropped = dropped
        self.frame_log = frame_log
        self.queues = [deque() for _ in range(n_nodes)]
        self.tx_end = [-1.0] * n_nodes
        self.sending: list[Frame | None] = [None] * n_nodes
        self.waiting = [False] * n_nodes
        self.stats = [NodeStats() for _ in range(n_nodes)]
        self._r2 = cfg.range * cfg.range
        self._step = -1
        self._step_start = 0.0
        self._step_end = -1.0
        self.receivers = None
        self._nbrs: list[list[int]] = []
        self._nbr_sets: list[set[int]] = []
        self._frozen = False

    # topology -----------------------------------------------------------
    def _refresh(self):
        now = self.sim.now
        if self._step_start <= now < self._step_end:
            return
        k = self.traj.index(now)
        dt = self.traj.step_interval
        self._step_start = k * dt
        self._step_end = (k + 1) * dt if k < self.traj.n_steps - 1 else float("inf")
        if k != self._step:
            self._step = k
            adj = adjacency(self.traj.positions[k], self.cfg.range)
            rows = [np.flatnonzero(r).tolist() for r in adj]
            self._nbrs = rows
            self._nbr_sets = [set(r) for r in rows]

    def neighbors_of(self, node: int) -> list[int]:
        self._refresh()
        return self._nbrs[node]

    def in_range(self, u: int, v: int) -> bool:
        self._refresh()
        return v in self._nbr_sets[u]

    # queueing -----------------------------------------------------------
    def enqueue(self, node: int, frame: Frame) -> bool:
        q = self.queues[node]
        st = self.stats[node]
        st.enqueued += 1
        if len(q) >= self.cfg.queue_capacity:
            st.dropped_overflow += 1
            self._log(node, "drop-overflow", frame)
            self.dropped(node, frame, "overflow")
            return False
        frame.enqueue_time = self.sim.now
        q.append(frame)
        self._kick(node)
        return True

    def _kick(self, node: int) -> None:
        if self.sending[node] is not None or self.waiting[node] or not self.queues[node]:
            return
        now = self.sim.now
        tx_end = self.tx_end
        for v in self.neighbors_of(node):
            if tx_end[v] > now:
                self.waiting[node] = True
                # uniform in (0, backoff_max]
                delay = self.cfg.backoff_max * (1.0 - self.rng.uniform())
                self.sim.schedule(now + delay, self._retry, node)
                return
        frame = self.queues[node].popleft()
        air = frame.size * 8.0 / self.cfg.bitrate
        self.sending[node] = frame
        self.tx_end[node] = now + air
        self.stats[node].airtime += air
        self._log(node, "tx", frame)
        self.sim.schedule(now + air, self._tx_done, node, frame)

    def _retry(self, node: int) -> None:
        self.waiting[node] = False
        self._kick(node)

    def transmit_next(self, node: int) -> None:
        """Start the head-of-line frame if the node is idle (no-op otherwise)."""
        self._kick(node)

    def _tx_done(self, node: int, frame: Frame) -> None:
        self.sending[node] = None
        st = self.stats[node]
        dst = frame.link_dst
        if dst == BROADCAST:
            st.delivered += 1
            for v in list(self.neighbors_of(node)):
                self._hand_over(v, frame, node)
        elif self.in_range(node, dst):
            st.delivered += 1
            self._hand_over(dst, frame, node)
        else:
            st.lost_range += 1
            self._log(node, "lost-range", frame)
            self.dropped(node, frame, "range")
            self.link_break(node, dst, frame)
        self._kick(node)

    def _hand_over(self, v: int, frame: Frame, sender: int) -> None:
        if not self.cfg.propagation:
            if self.receivers is not None:
                self.receivers[v](frame, sender)
            else:
                self.receive(v, frame, sender)
            return
        pos = self.traj.at(self.sim.now)
        delay = float(np.linalg.norm(pos[v] - pos[sender])) / SPEED_OF_LIGHT
        self.sim.schedule(self.sim.now + delay, self.receive, v, frame, sender)

    def in_flight(self, node: int) -> int:
        return len(self.queues[node]) + (self.sending[node] is not None)

    def _log(self, node, event, frame):
        if self.frame_log is not None:
            self.frame_log.append((self.sim.now, node, event, frame.kind, frame.size))

    def dump_frame_log(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,node,event,kind,size\n")
            for t, node, event, kind, size in self.frame_log or ():
                fh.write(f"{t!r},{node},{event},{kind},{size}\n")
