"""Single scenario runs."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from ..adversary import (Collusion, FloodingNode, attacker_count, make_attacker, select_attackers,
                         snapshot_active_relays)
from ..engine import Simulator
from ..mobility import Trajectory, place_gbs, place_nodes
from ..network import Network
from ..workload import FLOW_LEG, GBS_LEG, MetricsReport, e2e, overhead, pdr, safe, setup_flows
from .config import ScenarioConfig

CSV_COLUMNS = ("seed", "alpha", "nodes", "attack", "placement", "ratio", "pdr", "e2e_s",
               "overhead", "sent", "received", "control_received", "data_received",
               "drops_attacker", "drops_overflow", "losses_range")


@dataclass
class RunResult:
    config: ScenarioConfig
    report: MetricsReport
    attackers: frozenset
    flows: list
    conservation_errors: dict
    network: Network | None = None

    @property
    def pdr(self):
        return safe(pdr, self.report)

    @property
    def e2e(self):
        return safe(e2e, self.report)

    @property
    def overhead(self):
        return safe(overhead, self.report)

    def row(self) -> dict:
        c, r = self.config, self.report
        return {
            "seed": c.seed, "alpha": c.alpha, "nodes": c.nodes, "attack": c.attack,
            "placement": c.placement, "ratio": c.ratio, "pdr": self.pdr,
            "e2e_s": self.e2e, "overhead": self.overhead,
            "sent": r.app_packets_sent, "received": r.app_packets_received,
            "control_received": r.control_received, "data_received": r.data_received,
            "drops_attacker": r.drops_attacker, "drops_overflow": r.drops_overflow,
            "losses_range": r.losses_range,
        }


def format_value(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def csv_text(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def build_topology(cfg: ScenarioConfig, sim: Simulator):
    """Trajectory of every node plus the flow set; node ``nodes - 1`` is the GBS."""
    mcfg = cfg.mobility()
    n_uav = cfg.nodes - 1
    gbs = cfg.nodes - 1
    mob = sim.stream("mobility")
    states = place_nodes(n_uav, mob, mcfg)
    traj = Trajectory.generate(states, mcfg, cfg.sim_time, mob,
                               static=[place_gbs(mcfg.bounds)])
    reserve = attacker_count(cfg.nodes, cfg.attacker_reserve_ratio)
    flows = setup_flows(range(n_uav), gbs, sim.stream("traffic"), n_flows=cfg.n_flows,
                        reserve=reserve, rate=cfg.packet_rate, payload=cfg.packet_size,
                        start=cfg.flow_start, stop=cfg.sim_time)
    return traj, gbs, flows


def _network(cfg, sim, traj, gbs, flows, factory=None, frame_log=None):
    legs = (FLOW_LEG, GBS_LEG) if cfg.pdr_legs == "both" else (FLOW_LEG,)
    net = Network(sim, traj, cfg.nodes, cfg.medium(), cfg.aodv(), gbs=gbs,
                  node_factory=factory, end_time=cfg.sim_time, gbs_relay=cfg.gbs_relay,
                  legs_in_pdr=legs, frame_log=frame_log)
    net.add_flows(flows)
    return net


def active_relays(cfg: ScenarioConfig, t_snapshot: float | None = None) -> set[int]:
    """Relays of the attack-free run at ``t_snapshot`` (default ``snapshot_time``)."""
    sim = Simulator(cfg.seed)
    traj, gbs, flows = build_topology(cfg, sim)
    net = _network(cfg, sim, traj, gbs, flows)
    net.run(min(cfg.snapshot_time if t_snapshot is None else t_snapshot, cfg.sim_time))
    return snapshot_active_relays(net, flows)


def run_scenario(cfg: ScenarioConfig, keep_network=False, frame_log=None,
                 out_dir: str | None = None) -> RunResult:
    cfg.validate()
    sim = Simulator(cfg.seed)
    traj, gbs, flows = build_topology(cfg, sim)
    attack = cfg.attack_config()
    attackers = frozenset()
    if attack.active:
        relays = active_relays(cfg) if attack.placement == "on_active_route" else None
        attackers = select_attackers(range(cfg.nodes), flows, attack,
                                     sim.stream("attacker-select"), gbs=gbs, relays=relays)
    aodv_cfg = cfg.aodv()
    rng_attack = sim.stream("attack")
    collusion = Collusion(attackers)

    def factory(i, net):
        if i in attackers:
            return make_attacker(attack.kind, i, net, aodv_cfg, attack, rng_attack, collusion)
        return None

    net = _network(cfg, sim, traj, gbs, flows, factory, frame_log)
    for node in net.nodes:
        if isinstance(node, FloodingNode):
            node.start()
    net.run(cfg.sim_time)
    report = net.finish()
    result = RunResult(cfg, report, attackers, flows, net.metrics.conservation_errors(),
                       net if keep_network else None)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        name = f"run_{cfg.attack}_{cfg.placement}_r{cfg.ratio:g}_n{cfg.nodes}_s{cfg.seed}.csv"
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(csv_text([result.row()]))
    return result
