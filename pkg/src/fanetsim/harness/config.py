"""Scenario configuration and the flat ``key = value`` scenario file format."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from ..adversary import ATTACK_KINDS, PLACEMENTS, AttackConfig
from ..aodv import AodvConfig
from ..medium import MediumConfig
from ..mobility import MobilityConfig

# Reference-scale simulation parameters; the defaults below match them.
REFERENCE_SCALE = {
    "sim_time": 1800.0,
    "area_x": 12000.0,
    "area_y": 12000.0,
    "area_z": 300.0,
    "nodes": 25,
    "mean_speed": 100.0,
    "range": 250.0,
    "packet_size": 512,
    "packet_rate": 1.0,
    "bitrate": 11e6,
    "alpha_start": 0.25,
    "alpha_step": 0.05,
}
DEFAULT_RATIOS = (0.05, 0.10, 0.15, 0.20, 0.25)
DEFAULT_SEEDS = tuple(range(1, 11))


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    nodes: int = 25
    area_x: float = 12000.0
    area_y: float = 12000.0
    area_z: float = 300.0
    sim_time: float = 1800.0
    # mobility
    alpha: float = 0.25
    alpha_start: float = 0.25
    alpha_step: float = 0.05
    mean_speed: float = 100.0
    speed_sd: float = 20.0
    direction_sd: float = 0.3
    pitch_sd: float = 0.05
    step_interval: float = 1.0
    # medium
    range: float = 250.0
    bitrate: float = 11e6
    queue_capacity: int = 64
    backoff_max: float = 0.002
    propagation: bool = False
    # traffic
    packet_size: int = 512
    packet_rate: float = 1.0
    n_flows: int = 10
    flow_start: float = 10.0
    gbs_relay: bool = True
    pdr_legs: str = "both"
    # routing
    active_route_timeout: float = 3.0
    seen_cache_lifetime: float = 3.0
    pending_capacity: int = 32
    ttl: int = 32
    rreq_retries: int = 2
    net_traversal_time: float = 2.8
    improved_rreq: bool = True
    # attack
    attack: str = "none"
    ratio: float = 0.0
    placement: str = "random"
    drop_probability: float = 1.0
    seq_boost: int = 100
    flood_burst: int = 10
    flood_period: float = 3.0
    flood_nonexistent: bool = False
    snapshot_time: float = 20.0
    attacker_reserve_ratio: float = 0.25
    # sweep
    seeds: tuple = DEFAULT_SEEDS
    ratios: tuple = DEFAULT_RATIOS
    attacks: tuple = ("sinkhole", "dropping", "blackhole", "flooding")
    densities: tuple = (25, 50)
    out_dir: str = "results"

    # derived component configs -------------------------------------------
    def mobility(self) -> MobilityConfig:
        return MobilityConfig(alpha=self.alpha, mean_speed=self.mean_speed,
                              step_interval=self.step_interval, speed_sd=self.speed_sd,
                              direction_sd=self.direction_sd, pitch_sd=self.pitch_sd,
                              bounds=(self.area_x, self.area_y, self.area_z))

    def medium(self) -> MediumConfig:
        return MediumConfig(range=self.range, bitrate=self.bitrate,
                            queue_capacity=self.queue_capacity,
                            backoff_max=self.backoff_max, propagation=self.propagation)

    def aodv(self) -> AodvConfig:
        return AodvConfig(active_route_timeout=self.active_route_timeout,
                          seen_cache_lifetime=self.seen_cache_lifetime,
                          pending_capacity=self.pending_capacity, ttl=self.ttl,
                          rreq_retries=self.rreq_retries,
                          net_traversal_time=self.net_traversal_time,
                          payload_size=self.packet_size, improved_rreq=self.improved_rreq)

    def attack_config(self) -> AttackConfig:
        return AttackConfig(kind=self.attack, attacker_ratio=self.ratio,
                            placement=self.placement, drop_probability=self.drop_probability,
                            seq_boost=self.seq_boost, flood_burst=self.flood_burst,
                            flood_period=self.flood_period, flood_start=self.flow_start,
                            flood_nonexistent_targets=self.flood_nonexistent,
                            snapshot_time=self.snapshot_time)

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def alpha_for(self, seed_index: int) -> float:
        return round(self.alpha_start + self.alpha_step * seed_index, 10)

    # validation ------------------------------------------------------------
    def problems(self) -> list[tuple[str, str]]:
        p = []
        if self.sim_time <= self.flow_start:
            p.append(("sim_time", f"sim_time={self.sim_time} leaves no time for flows "
                                  f"starting at {self.flow_start}"))
        if self.nodes < 2 * self.n_flows + 2:
            p.append(("nodes", f"nodes={self.nodes} is too few for {self.n_flows} flows + GBS"))
        for k in ("area_x", "area_y", "area_z", "range", "bitrate", "packet_rate",
                  "step_interval", "mean_speed"):
            if getattr(self, k) <= 0:
                p.append((k, f"{k} must be positive"))
        if not 0 <= self.alpha <= 1:
            p.append(("alpha", "alpha must lie in [0, 1]"))
        if self.queue_capacity < 1:
            p.append(("queue_capacity", "queue_capacity must be >= 1"))
        if self.attack not in ATTACK_KINDS:
            p.append(("attack", f"unknown attack {self.attack!r}; choose from {ATTACK_KINDS}"))
        if self.placement not in PLACEMENTS:
            p.append(("placement", f"unknown placement {self.placement!r}"))
        if not 0 <= self.ratio <= 1:
            p.append(("ratio", "ratio must lie in [0, 1]"))
        if not 0 <= self.drop_probability <= 1:
            p.append(("drop_probability", "drop_probability must lie in [0, 1]"))
        if self.pdr_legs not in ("both", "flow"):
            p.append(("pdr_legs", "pdr_legs must be 'both' or 'flow'"))
        if self.flood_burst < 1 or self.flood_period <= 0:
            p.append(("flood_burst", "flood_burst >= 1 and flood_period > 0 required"))
        return p

    def validate(self, lines: dict | None = None) -> "ScenarioConfig":
        probs = self.problems()
        if probs:
            lines = lines or {}
            raise ConfigError([
                (f"line {lines[k]}: " if k in lines else "") + msg for k, msg in probs
            ])
        return self


FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(name, value):
    default = getattr(ScenarioConfig(), name)
    if isinstance(default, bool):
        if isinstance(value, str):
            if value.lower() in ("true", "yes", "on", "1"):
                return True
            if value.lower() in ("false", "no", "off", "0"):
                return False
            raise TypeError(f"expected a boolean, got {value!r}")
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError(f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, list):
            value = [value]
        return tuple(value)
    return str(value)


def _parse_value(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    return text


def parse_scenario(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse ``key = value`` lines. ``#`` starts a comment."""
    base = base or ScenarioConfig()
    values, lines, problems = {}, {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_TYPES:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            values[key] = _coerce(key, _parse_value(val))
            lines[key] = lineno
        except TypeError as exc:
            problems.append(f"line {lineno}: {key}: {exc}")
    if problems:
        raise ConfigError(problems)
    cfg = replace(base, **values)
    return cfg.validate(lines)


def load_scenario(path, base=None) -> ScenarioConfig:
    with open(path) as fh:
        return parse_scenario(fh.read(), base)


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_scenario(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {_format(v)}\n" for k, v in asdict(cfg).items())
