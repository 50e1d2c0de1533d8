"""
Watching AODV find a route
==========================

A static five-node chain. The first packet triggers a flood of route
requests, the reply installs routes hop by hop, and later packets ride the
cached route. Afterwards the hop counts are compared with breadth-first
search on the same graph.
"""

from fanetsim.oracles import bfs_hops, quiescence, static_network
from fanetsim.workload import Flow, e2e, pdr

positions = [(200.0 * i, 0.0, 0.0) for i in range(5)]
frames = []
net = static_network(positions, end_time=20.0, frame_log=frames)
net.add_flows([Flow(0, 4, start=1.0, stop=20.0)])
net.run(20.0)
report = net.finish()

print("first frames on the air:")
for t, node, event, kind, size in frames[:8]:
    print(f"  t={t:9.6f}  node {node}  {event} {kind:<4} {size} B")

print("\nroute table at t=20 (now, node, dest, next hop, hops, seq, active):")
for row in net.route_table_rows():
    if row[2] == 4:
        print("  ", row)

print(f"\nPDR {pdr(report):.3f}, mean delay {1000 * e2e(report):.2f} ms, "
      f"{report.control_received} control receptions")

hops = bfs_hops(positions)
print("BFS hops 0->4:", int(hops[0, 4]), " installed:", net.nodes[0].routes[4].hop_count)
print("route requests sent by an idle network in 100 s:", quiescence())
