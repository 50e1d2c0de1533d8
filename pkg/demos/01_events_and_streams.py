"""
Events, clocks and random streams
=================================

The simulator is a priority queue of timed callbacks. Every source of
randomness draws from its own labelled stream, so adding a consumer in one
component never shifts the numbers another component sees.
"""

from fanetsim import Simulator

sim = Simulator(seed=42)
log = []

# Two events at the same instant keep their insertion order.
sim.schedule(5.0, log.append, "five")
sim.schedule(3.0, log.append, "three")
sim.schedule(3.0, log.append, "three again")
late = sim.schedule(8.0, log.append, "cancelled")
late.cancel()

n = sim.run_until(10.0)
print(n, "events ->", log, "clock", sim.now)

# Streams are keyed by (seed, label): same pair, same numbers.
a = Simulator(7).stream("mobility")
b = Simulator(7).stream("mobility")
c = Simulator(7).stream("traffic")
print([round(a.uniform(), 4) for _ in range(3)])
print([round(b.uniform(), 4) for _ in range(3)])
print([round(c.uniform(), 4) for _ in range(3)], "<- different label")
