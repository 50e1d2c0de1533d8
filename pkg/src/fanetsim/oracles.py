"""Small static-topology checks of the routing layer against independent answers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .aodv import AodvConfig
from .engine import Simulator
from .medium import MediumConfig, adjacency
from .mobility import Trajectory
from .network import Network
from .workload import Flow


def static_network(positions, seed=0, medium_cfg=MediumConfig(), aodv_cfg=AodvConfig(),
                   node_factory=None, gbs=None, end_time=float("inf"), frame_log=None,
                   step_interval=1.0):
    """Network over fixed positions, or over a (steps, n, 3) position schedule."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 2:
        pos = pos[None]
    sim = Simulator(seed)
    traj = Trajectory(pos, step_interval)
    return Network(sim, traj, pos.shape[1], medium_cfg, aodv_cfg, gbs=gbs,
                   node_factory=node_factory, end_time=end_time, frame_log=frame_log)


def bfs_hops(positions, range_m=250.0) -> np.ndarray:
    adj = adjacency(positions, range_m)
    return shortest_path(adj.astype(float), unweighted=True, directed=False)


@dataclass
class OracleResult:
    name: str
    checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.checked} checks, {len(self.failures)} failures"


def shortest_path_oracle(placements=50, n_nodes=15, side=600.0, seed=2024,
                         range_m=250.0, gap=0.5) -> OracleResult:
    """Installed hop counts after discovery versus BFS on the unit-disc graph."""
    rng = np.random.default_rng(seed)
    checked, failures = 0, []
    for p in range(placements):
        pos = np.column_stack([rng.uniform(0, side, (n_nodes, 2)), np.zeros(n_nodes)])
        hops = bfs_hops(pos, range_m)
        for s in range(n_nodes):
            targets = [d for d in range(n_nodes) if d != s and np.isfinite(hops[s, d])]
            if not targets:
                continue
            net = static_network(pos, seed=p * 1000 + s, medium_cfg=MediumConfig(range=range_m))
            installed = {}

            def probe(d, node=net.nodes[s]):
                r = node.routes.get(d)
                installed[d] = r.hop_count if r is not None else None

            for k, d in enumerate(targets):
                net.sim.schedule(k * gap, net.nodes[s].originate_rreq, d)
                net.sim.schedule(k * gap + gap * 0.99, probe, d)
            net.run(len(targets) * gap)
            for d in targets:
                checked += 1
                if installed[d] != int(hops[s, d]):
                    failures.append((p, s, d, installed[d], int(hops[s, d])))
    return OracleResult("shortest-path hop counts", checked, failures)


def static_chain_delivery(n=4, spacing=200.0, duration=100.0, seed=0) -> tuple[int, int]:
    """Originated and delivered counts for one 1 pkt/s flow along a static chain."""
    pos = [(i * spacing, 0.0, 0.0) for i in range(n)]
    net = static_network(pos, seed=seed, end_time=duration)
    net.add_flows([Flow(0, n - 1, rate=1.0, start=0.0, stop=duration)])
    net.run(duration)
    report = net.finish()
    return report.app_packets_sent, report.app_packets_received


def quiescence(n=15, side=600.0, duration=100.0, seed=7) -> int:
    """RREQs originated by a static network with no traffic."""
    rng = np.random.default_rng(seed)
    pos = np.column_stack([rng.uniform(0, side, (n, 2)), np.zeros(n)])
    net = static_network(pos, seed=seed, end_time=duration)
    net.run(duration)
    return sum(node.rreqs_originated for node in net.nodes)


def run_all() -> list[OracleResult]:
    results = [shortest_path_oracle()]
    sent, got = static_chain_delivery()
    results.append(OracleResult("static chain delivery >= 98 of 100", 1,
                                [] if got >= 98 else [(sent, got)]))
    q = quiescence()
    results.append(OracleResult("no RREQ without traffic", 1, [] if q == 0 else [q]))
    return results
