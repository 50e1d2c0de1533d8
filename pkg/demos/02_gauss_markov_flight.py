"""
3D Gauss-Markov flight paths
============================

Speed, heading and pitch each relax toward a mean with memory ``alpha``.
Low alpha gives jittery paths, alpha close to 1 gives long straight legs.
Walls reflect the node and its mean heading.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fanetsim import MobilityConfig, Simulator, place_gbs, place_nodes
from fanetsim.mobility import Trajectory

fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
for ax, alpha in zip(axes, (0.25, 0.9)):
    cfg = MobilityConfig(alpha=alpha, bounds=(3000.0, 3000.0, 300.0))
    rng = Simulator(1).stream("mobility")
    states = place_nodes(5, rng, cfg)
    traj = Trajectory.generate(states, cfg, 600.0, rng, static=[place_gbs(cfg.bounds)])
    for i in range(5):
        p = traj.positions[:, i]
        ax.plot(p[:, 0], p[:, 1], lw=0.8)
    ax.plot(*traj.positions[0, -1, :2], "k^", label="base station")
    ax.set_title(f"alpha = {alpha}")
    ax.set_aspect("equal")
    ax.legend(loc="upper right")

    speeds = np.linalg.norm(np.diff(traj.positions[:, :5], axis=0), axis=2)
    print(f"alpha={alpha}: mean speed {speeds.mean():.1f} m/s, "
          f"altitude range {traj.positions[:, :5, 2].min():.0f}-{traj.positions[:, :5, 2].max():.0f} m")

fig.tight_layout()
fig.savefig("gauss_markov_paths.svg")
print("wrote gauss_markov_paths.svg")
