"""CBR flows, the destination-to-base-station relay leg, and run metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

FLOW_LEG, GBS_LEG = 0, 1
FATES = ("delivered", "attacker", "range", "overflow", "ttl", "no_route", "pending")


class MetricUnavailable(ValueError):
    """A ratio metric whose denominator is zero."""


@dataclass(frozen=True)
class Flow:
    source: int
    destination: int
    rate: float = 1.0
    payload: int = 512
    start: float = 10.0
    stop: float = 1800.0

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("flow source and destination must differ")
        if self.rate <= 0:
            raise ValueError("flow rate must be positive")

    def emission_times(self):
        """Application send instants in ``[start, stop)``."""
        n = max(0, math.ceil((self.stop - self.start) * self.rate - 1e-9))
        return [self.start + k / self.rate for k in range(n)]


def setup_flows(uavs, gbs, rng, n_flows=10, reserve=0, **flow_kw) -> list[Flow]:
    """Random source/destination pairs among the UAVs.

    Endpoints are all distinct when ``len(uavs) - 2 * n_flows >= reserve``.
    ``reserve`` keeps that many UAVs out of the endpoint pool so an attacker
    set of that size can still be drawn; when the pool would be too small,
    some nodes serve as the source of one flow and the destination of
    another (never of the same flow).
    """
    uavs = [u for u in uavs if u != gbs]
    if reserve and len(uavs) - reserve < 2 * n_flows:
        pool_size = len(uavs) - reserve
        if pool_size < n_flows + 1:
            raise ValueError(f"too few nodes for {n_flows} flows with {reserve} reserved")
    else:
        pool_size = 2 * n_flows
        if len(uavs) < 2 * n_flows + 1:
            raise ValueError(f"need at least {2 * n_flows + 1} non-GBS nodes, got {len(uavs)}")
    pool = rng.permutation(uavs)[:pool_size]
    sources = pool[:n_flows]
    dests = pool[n_flows:]
    if len(dests) < n_flows:
        dests = rng.permutation(dests + sources[: n_flows - len(dests)])
        while any(s == d for s, d in zip(sources, dests)):
            dests = rng.permutation(dests)
    return [Flow(s, d, **flow_kw) for s, d in zip(sources, dests)]


@dataclass
class MetricsReport:
    app_packets_sent: int = 0
    app_packets_received: int = 0
    delay_sum: float = 0.0
    control_received: int = 0
    data_received: int = 0
    drops_attacker: int = 0
    drops_overflow: int = 0
    losses_range: int = 0
    drops_ttl: int = 0
    drops_no_route: int = 0
    pending_at_end: int = 0
    rrep_dropped: int = 0
    per_flow: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def pdr(report: MetricsReport) -> float:
    if report.app_packets_sent <= 0:
        raise MetricUnavailable("no application packets were sent")
    return report.app_packets_received / report.app_packets_sent


def e2e(report: MetricsReport) -> float:
    if report.app_packets_received <= 0:
        raise MetricUnavailable("no application packets were delivered")
    return report.delay_sum / report.app_packets_received


def overhead(report: MetricsReport) -> float:
    if report.data_received <= 0:
        raise MetricUnavailable("no data receptions")
    return report.control_received / report.data_received


def safe(metric, report):
    """``metric(report)`` or NaN when undefined."""
    try:
        return metric(report)
    except MetricUnavailable:
        return float("nan")


class Metrics:
    """Live counters for one run.

    Every originated packet ends in exactly one fate bucket, kept per
    ``(flow, leg)`` so conservation can be checked flow by flow.
    """

    def __init__(self, legs_in_pdr=(FLOW_LEG, GBS_LEG)):
        self.legs_in_pdr = tuple(legs_in_pdr)
        self.sent = 0
        self.received = 0
        self.delay_sum = 0.0
        self.control_received = 0
        self.data_received = 0
        self.rrep_dropped = 0
        self.originated: dict[tuple[int, int], int] = {}
        self.fates: dict[tuple[int, int], dict[str, int]] = {}

    def _bucket(self, pkt):
        key = (pkt.flow, pkt.leg)
        b = self.fates.get(key)
        if b is None:
            b = self.fates[key] = dict.fromkeys(FATES, 0)
        return b

    def originate(self, pkt):
        key = (pkt.flow, pkt.leg)
        self.originated[key] = self.originated.get(key, 0) + 1
        self._bucket(pkt)
        if pkt.leg in self.legs_in_pdr:
            self.sent += 1

    def delivered(self, pkt, now):
        self._bucket(pkt)["delivered"] += 1
        if pkt.leg in self.legs_in_pdr:
            self.received += 1
            self.delay_sum += now - pkt.created

    def packet_fate(self, pkt, fate):
        self._bucket(pkt)[fate] += 1

    def total(self, fate):
        return sum(b[fate] for b in self.fates.values())

    def conservation_errors(self):
        """Flows whose originated count differs from the sum of their fates."""
        bad = {}
        for key, n in self.originated.items():
            s = sum(self.fates[key].values())
            if s != n:
                bad[key] = (n, s)
        return bad

    def report(self) -> MetricsReport:
        per_flow = {f"{f}/{leg}": dict(self.fates[(f, leg)], originated=n)
                    for (f, leg), n in sorted(self.originated.items())}
        return MetricsReport(
            app_packets_sent=self.sent,
            app_packets_received=self.received,
            delay_sum=self.delay_sum,
            control_received=self.control_received,
            data_received=self.data_received,
            drops_attacker=self.total("attacker"),
            drops_overflow=self.total("overflow"),
            losses_range=self.total("range"),
            drops_ttl=self.total("ttl"),
            drops_no_route=self.total("no_route"),
            pending_at_end=self.total("pending"),
            rrep_dropped=self.rrep_dropped,
            per_flow=per_flow,
        )
