"""Wires nodes, medium, mobility and traffic into one runnable simulation."""

from __future__ import annotations

from .aodv import AodvConfig, AodvNode, DataPacket
from .medium import DATA, Medium, MediumConfig
from .workload import FLOW_LEG, GBS_LEG, Flow, Metrics


class Network:
    def __init__(self, sim, trajectory, n_nodes: int, medium_cfg: MediumConfig = MediumConfig(),
                 aodv_cfg: AodvConfig = AodvConfig(), gbs: int | None = None,
                 node_factory=None, end_time: float = float("inf"), gbs_relay: bool = True,
                 legs_in_pdr=(FLOW_LEG, GBS_LEG), frame_log: list | None = None):
        self.sim = sim
        self.n = n_nodes
        self.gbs = gbs
        self.end_time = end_time
        self.gbs_relay = gbs_relay and gbs is not None
        self.medium_cfg = medium_cfg
        self.aodv_cfg = aodv_cfg
        self.trajectory = trajectory
        self.metrics = Metrics(legs_in_pdr)
        self.medium = Medium(sim, trajectory, n_nodes, medium_cfg, sim.stream("mac-backoff"),
                             self._receive, self._link_break, self._dropped, frame_log)
        self.nodes: list[AodvNode] = []
        for i in range(n_nodes):
            node = node_factory(i, self) if node_factory else None
            self.nodes.append(node if node is not None else AodvNode(i, self, aodv_cfg))
        self.medium.receivers = [node.receive for node in self.nodes]
        self.flows: list[Flow] = []
        self._relay_flow: dict[int, int] = {}
        self._report = None

    # medium callbacks ----------------------------------------------------
    def _receive(self, v, frame, sender):
        self.nodes[v].receive(frame, sender)

    def _link_break(self, u, next_hop, frame):
        self.nodes[u].handle_link_break(next_hop)

    def _dropped(self, u, frame, reason):
        if frame.kind == DATA:
            self.metrics.packet_fate(frame.payload, reason)

    # traffic -------------------------------------------------------------
    def add_flows(self, flows):
        for f in flows:
            idx = len(self.flows)
            self.flows.append(f)
            self._relay_flow.setdefault(f.destination, idx)
            times = f.emission_times()
            if times:
                self.sim.schedule(times[0], self._emit, idx, 0, times)

    def _emit(self, idx, k, times):
        f = self.flows[idx]
        self.originate(f.source, f.destination, idx, FLOW_LEG)
        if k + 1 < len(times):
            self.sim.schedule(times[k + 1], self._emit, idx, k + 1, times)

    def originate(self, src, dst, flow, leg):
        pkt = DataPacket(src, dst, flow, leg, self.sim.now, self.aodv_cfg.ttl)
        self.metrics.originate(pkt)
        return self.nodes[src].send_data(pkt)

    def deliver(self, node, pkt):
        self.metrics.delivered(pkt, self.sim.now)
        if pkt.leg == FLOW_LEG and self.gbs_relay and node.id != self.gbs:
            self.originate(node.id, self.gbs, pkt.flow, GBS_LEG)

    # running ---------------------------------------------------------------
    def run(self, t_end=None):
        t_end = self.end_time if t_end is None else t_end
        return self.sim.run_until(t_end)

    def finish(self):
        """Book every packet still buffered or queued as pending; return the report.

        Safe to call more than once: later calls return the first report.
        """
        if self._report is not None:
            return self._report
        m = self.metrics
        for node in self.nodes:
            for buf in node.pending.values():
                for pkt in buf:
                    m.packet_fate(pkt, "pending")
            node.pending.clear()
        for u in range(self.n):
            for frame in self.medium.queues[u]:
                if frame.kind == DATA:
                    m.packet_fate(frame.payload, "pending")
            frame = self.medium.sending[u]
            if frame is not None and frame.kind == DATA:
                m.packet_fate(frame.payload, "pending")
        self._report = m.report()
        return self._report

    def route_table_rows(self):
        now = self.sim.now
        for node in self.nodes:
            yield from node.route_table_rows(now)
