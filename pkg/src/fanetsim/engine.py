"""Discrete-event core: virtual clock, event queue and named RNG streams."""

from __future__ import annotations

import heapq
import zlib
from typing import Any, Callable

import numpy as np


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current virtual time."""


class SimEvent:
    """A scheduled action. ``fire_time`` and ``sequence`` give a total order."""

    __slots__ = ("fire_time", "sequence", "action", "args", "cancelled")

    def __init__(self, fire_time: float, sequence: int, action: Callable, args: tuple):
        self.fire_time = fire_time
        self.sequence = sequence
        self.action = action
        self.args = args
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def __repr__(self) -> str:
        name = getattr(self.action, "__name__", repr(self.action))
        return f"SimEvent(t={self.fire_time!r}, seq={self.sequence}, {name})"


class Simulator:
    """Single-threaded event loop.

    Events fire in ``(fire_time, sequence)`` order, so simultaneous events run
    in insertion order.
    """

    def __init__(self, seed: int = 0):
        self.now = 0.0
        self.seed = int(seed)
        self._queue: list[tuple[float, int, SimEvent]] = []
        self._seq = 0
        self._streams: dict[str, RngStream] = {}
        self.dispatched = 0
        self.trace: list[tuple[float, int]] | None = None

    def schedule(self, fire_time: float, action: Callable, *args: Any) -> SimEvent:
        if fire_time < self.now:
            raise SchedulingError(
                f"event at t={fire_time!r} scheduled in the past (now={self.now!r})"
            )
        ev = SimEvent(fire_time, self._seq, action, args)
        heapq.heappush(self._queue, (fire_time, self._seq, ev))
        self._seq += 1
        return ev

    def schedule_in(self, delay: float, action: Callable, *args: Any) -> SimEvent:
        return self.schedule(self.now + delay, action, *args)

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._queue if not ev.cancelled)

    def run_until(self, t_end: float) -> int:
        """Dispatch every event with ``fire_time <= t_end``; leave the clock at ``t_end``."""
        queue = self._queue
        pop = heapq.heappop
        trace = self.trace
        count = 0
        while queue and queue[0][0] <= t_end:
            t, seq, ev = pop(queue)
            if ev.cancelled:
                continue
            self.now = t
            if trace is not None:
                trace.append((t, seq))
            ev.action(*ev.args)
            count += 1
        if t_end > self.now:
            self.now = float(t_end)
        self.dispatched += count
        return count

    def stream(self, label: str) -> "RngStream":
        s = self._streams.get(label)
        if s is None:
            s = self._streams[label] = RngStream(self.seed, label)
        return s


class RngStream:
    """Deterministic random stream keyed by ``(master_seed, stream_label)``.

    Streams with different labels are seeded from independent branches of a
    numpy ``SeedSequence``, so draws in one subsystem never shift another.
    """

    def __init__(self, master_seed: int, stream_label: str):
        self.master_seed = int(master_seed)
        self.stream_label = stream_label
        key = zlib.crc32(stream_label.encode("utf-8"))
        ss = np.random.SeedSequence([self.master_seed & 0xFFFFFFFFFFFFFFFF, key])
        self.generator = np.random.Generator(np.random.PCG64(ss))
        self._uniform_buf = np.empty(0)
        self._upos = 0

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        # Buffered scalar draws; the MAC asks for many single samples.
        if self._upos >= len(self._uniform_buf):
            self._uniform_buf = self.generator.random(4096)
            self._upos = 0
        u = self._uniform_buf[self._upos]
        self._upos += 1
        return low + (high - low) * float(u)

    def gaussian(self, mean: float = 0.0, sd: float = 1.0, size=None):
        if size is None:
            return float(self.generator.normal(mean, sd))
        return self.generator.normal(mean, sd, size)

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in the closed range ``[low, high]``."""
        if high < low:
            raise ValueError(f"empty integer range [{low}, {high}]")
        if high == low:
            return int(low)
        n = high - low + 1
        return int(low) + min(int(self.uniform() * n), n - 1)

    def permutation(self, items) -> list:
        items = list(items)
        order = self.generator.permutation(len(items))
        return [items[i] for i in order]

    def choice(self, items):
        items = list(items)
        return items[self.integer(0, len(items) - 1)]


def draw(stream: RngStream, distribution: str, *params):
    """Single sample from ``stream``: ``uniform``, ``gaussian`` or ``integer-range``."""
    if distribution == "uniform":
        return stream.uniform(*params)
    if distribution == "gaussian":
        return stream.gaussian(*params)
    if distribution in ("integer-range", "integer"):
        return stream.integer(*params)
    raise ValueError(f"unknown distribution {distribution!r}")
