"""
Four attacks on one swarm
=========================

The same 40-node swarm, flown in an 800 m square so the radio graph is
connected, with a quarter of the spare nodes turned malicious. The
baseline and each attack use identical flight paths and flows; only the
behaviour of the chosen nodes changes.
"""

from fanetsim.harness import ScenarioConfig, run_scenario

base = ScenarioConfig(seed=5, nodes=40, area_x=800, area_y=800, sim_time=300.0)

print(f"{'scenario':<28}{'PDR':>7}{'E2E ms':>9}{'overhead':>10}{'attacker drops':>16}")
for attack, placement in (("none", "random"), ("sinkhole", "random"),
                          ("dropping", "random"), ("dropping", "on_active_route"),
                          ("blackhole", "random"), ("flooding", "random")):
    cfg = base.with_(attack=attack, placement=placement,
                     ratio=0.0 if attack == "none" else 0.25)
    res = run_scenario(cfg)
    label = attack if placement == "random" else f"{attack} (on route)"
    print(f"{label:<28}{res.pdr:>7.3f}{1000 * res.e2e:>9.1f}{res.overhead:>10.2f}"
          f"{res.report.drops_attacker:>16}")
