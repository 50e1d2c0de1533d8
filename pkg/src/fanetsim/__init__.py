"""Discrete-event FANET simulator: AODV, 3D Gauss-Markov mobility and routing attacks."""

from .engine import RngStream, SchedulingError, Simulator, draw
from .mobility import MobilityConfig, MobilityState, gmm_step, place_gbs, place_nodes
from .medium import Frame, MediumConfig, neighbors
from .aodv import AodvConfig, AodvNode, RouteEntry
from .adversary import AttackConfig, select_attackers
from .workload import Flow, MetricsReport, e2e, overhead, pdr, setup_flows
from .network import Network

__version__ = "0.1.0"
