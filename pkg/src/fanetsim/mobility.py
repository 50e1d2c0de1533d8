"""3D Gauss-Markov motion for UAVs and a fixed ground base station.

Speed, azimuth and pitch each evolve as

    v' = alpha * v + (1 - alpha) * mean + sqrt(1 - alpha**2) * N(0, sd)

and the node then flies for one step along the new heading. Walls reflect:
the position is mirrored back into the box and the matching velocity
component changes sign (the mean heading is mirrored with it so the memory
term does not steer the node straight back into the wall).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

BOUNDS = (12000.0, 12000.0, 300.0)


@dataclass(frozen=True)
class MobilityConfig:
    alpha: float = 0.25
    mean_speed: float = 100.0
    step_interval: float = 1.0
    speed_sd: float = 20.0
    direction_sd: float = 0.3
    pitch_sd: float = 0.05
    bounds: tuple[float, float, float] = BOUNDS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.step_interval <= 0:
            raise ValueError("step_interval must be positive")
        if min(self.speed_sd, self.direction_sd, self.pitch_sd) < 0:
            raise ValueError("perturbation sds must be non-negative")


@dataclass(frozen=True)
class MobilityState:
    position: tuple[float, float, float]
    speed: float
    direction: float
    pitch: float
    mean_speed: float
    mean_direction: float
    mean_pitch: float
    alpha: float

    def in_bounds(self, bounds=BOUNDS) -> bool:
        return all(0.0 <= c <= b for c, b in zip(self.position, bounds))


def _mirror(c, hi):
    """Fold coordinates into [0, hi]; return folded value and a flip mask."""
    c = np.asarray(c, dtype=float)
    period = 2.0 * hi
    m = np.mod(c, period)
    folded = np.where(m > hi, period - m, m)
    # An odd number of wall hits reverses the velocity component.
    flips = np.floor_divide(c, hi).astype(np.int64)
    flipped = (np.abs(flips) % 2) == 1
    return folded, flipped


def gmm_step_arrays(pos, speed, direction, pitch, mean_dir, mean_pitch,
                    cfg: MobilityConfig, noise, alpha=None, mean_speed=None):
    """Vectorised step over many nodes.

    ``noise`` is an (n, 3) array of standard normal draws for speed,
    direction and pitch. Returns new arrays; inputs are not modified.
    """
    a = cfg.alpha if alpha is None else alpha
    ms = cfg.mean_speed if mean_speed is None else mean_speed
    k = np.sqrt(np.maximum(0.0, 1.0 - np.square(a)))
    speed = a * speed + (1 - a) * ms + k * cfg.speed_sd * noise[:, 0]
    speed = np.maximum(speed, 0.0)
    direction = a * direction + (1 - a) * mean_dir + k * cfg.direction_sd * noise[:, 1]
    pitch = a * pitch + (1 - a) * mean_pitch + k * cfg.pitch_sd * noise[:, 2]

    dt = cfg.step_interval
    horiz = speed * np.cos(pitch) * dt
    new = np.empty_like(pos)
    new[:, 0] = pos[:, 0] + horiz * np.cos(direction)
    new[:, 1] = pos[:, 1] + horiz * np.sin(direction)
    new[:, 2] = pos[:, 2] + speed * np.sin(pitch) * dt

    bx, by, bz = cfg.bounds
    new[:, 0], fx = _mirror(new[:, 0], bx)
    new[:, 1], fy = _mirror(new[:, 1], by)
    new[:, 2], fz = _mirror(new[:, 2], bz)
    mean_dir = np.array(mean_dir, dtype=float, copy=True) * np.ones_like(direction)
    mean_pitch = np.array(mean_pitch, dtype=float, copy=True) * np.ones_like(pitch)
    # x wall: heading -> pi - heading; y wall: heading -> -heading
    direction = np.where(fx, math.pi - direction, direction)
    mean_dir = np.where(fx, math.pi - mean_dir, mean_dir)
    direction = np.where(fy, -direction, direction)
    mean_dir = np.where(fy, -mean_dir, mean_dir)
    pitch = np.where(fz, -pitch, pitch)
    mean_pitch = np.where(fz, -mean_pitch, mean_pitch)
    return new, speed, direction, pitch, mean_dir, mean_pitch


def gmm_step(state: MobilityState, cfg: MobilityConfig, rng) -> MobilityState:
    """Advance one node by one step. ``rng`` is an ``RngStream`` or numpy Generator."""
    gen = getattr(rng, "generator", rng)
    noise = gen.standard_normal((1, 3))
    cfg = replace(cfg, alpha=state.alpha)
    pos, sp, d, p, md, mp = gmm_step_arrays(
        np.array([state.position], dtype=float),
        np.array([state.speed]), np.array([state.direction]), np.array([state.pitch]),
        np.array([state.mean_direction]), np.array([state.mean_pitch]),
        cfg, noise, mean_speed=state.mean_speed,
    )
    return MobilityState(
        position=tuple(float(c) for c in pos[0]),
        speed=float(sp[0]), direction=float(d[0]), pitch=float(p[0]),
        mean_speed=state.mean_speed, mean_direction=float(md[0]),
        mean_pitch=float(mp[0]), alpha=state.alpha,
    )


def place_nodes(n: int, rng, cfg: MobilityConfig | None = None) -> list[MobilityState]:
    """Uniform positions in the box, uniform heading, speed at the mean."""
    if n <= 0:
        raise ValueError("need at least one node")
    cfg = cfg or MobilityConfig()
    gen = getattr(rng, "generator", rng)
    pos = gen.uniform(0.0, 1.0, (n, 3)) * np.asarray(cfg.bounds)
    heading = gen.uniform(0.0, 2 * math.pi, n)
    return [
        MobilityState(
            position=tuple(float(c) for c in pos[i]),
            speed=cfg.mean_speed, direction=float(heading[i]), pitch=0.0,
            mean_speed=cfg.mean_speed, mean_direction=float(heading[i]),
            mean_pitch=0.0, alpha=cfg.alpha,
        )
        for i in range(n)
    ]


def place_gbs(bounds=BOUNDS) -> tuple[float, float, float]:
    """The ground base station sits on the ground at the centre of the area."""
    return (bounds[0] / 2.0, bounds[1] / 2.0, 0.0)


class Trajectory:
    """Piecewise-constant positions of every node, one row per mobility step.

    UAV rows follow the Gauss-Markov process; static rows (the base station)
    never move. ``positions[k]`` holds the layout during
    ``[k * step, (k + 1) * step)``.
    """

    def __init__(self, positions: np.ndarray, step_interval: float):
        self.positions = positions
        self.step_interval = step_interval

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0]

    def index(self, t: float) -> int:
        k = int(t / self.step_interval)
        return min(max(k, 0), self.n_steps - 1)

    def at(self, t: float) -> np.ndarray:
        return self.positions[self.index(t)]

    @classmethod
    def generate(cls, states: list[MobilityState], cfg: MobilityConfig, duration: float,
                 rng, static: list[tuple[float, float, float]] = ()) -> "Trajectory":
        gen = getattr(rng, "generator", rng)
        n = len(states)
        steps = int(math.ceil(duration / cfg.step_interval)) + 1
        out = np.empty((steps, n + len(static), 3))
        pos = np.array([s.position for s in states], dtype=float).reshape(n, 3)
        speed = np.array([s.speed for s in states], dtype=float)
        direction = np.array([s.direction for s in states], dtype=float)
        pitch = np.array([s.pitch for s in states], dtype=float)
        mdir = np.array([s.mean_direction for s in states], dtype=float)
        mpitch = np.array([s.mean_pitch for s in states], dtype=float)
        alpha = np.array([s.alpha for s in states], dtype=float)
        mspeed = np.array([s.mean_speed for s in states], dtype=float)
        if static:
            out[:, n:, :] = np.asarray(static, dtype=float)
        out[0, :n] = pos
        for k in range(1, steps):
            noise = gen.standard_normal((n, 3))
            pos, speed, direction, pitch, mdir, mpitch = gmm_step_arrays(
                pos, speed, direction, pitch, mdir, mpitch, cfg, noise,
                alpha=alpha, mean_speed=mspeed,
            )
            out[k, :n] = pos
        return cls(out, cfg.step_interval)

    def dump_csv(self, path, every: int = 1) -> None:
        """Write ``time,node,x,y,z`` rows."""
        with open(path, "w") as fh:
            fh.write("time,node,x,y,z\n")
            for k in range(0, self.n_steps, every):
                t = k * self.step_interval
                for i, (x, y, z) in enumerate(self.positions[k]):
                    fh.write(f"{t:g},{i},{x:.3f},{y:.3f},{z:.3f}\n")
