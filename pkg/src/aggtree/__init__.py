"""Bounded in-network aggregation placement for tree networks.

Build a :class:`~aggtree.topology.TreeNetwork`, simulate the reduce
traffic of any blue-switch placement, and find the optimal placement
under a budget with :func:`~aggtree.solver.solve`.
"""

from .errors import AggTreeError
from .reduce_sim import (EdgeUtilization, PayloadModel, Placement,
                         simulate_bytes, simulate_reduce, total_utilization,
                         utilization_barrier)
from .scenarios import (CapacityLedger, ScenarioConfig, gen_complete_binary,
                        gen_loads, gen_payloads, gen_rpa, gen_workloads,
                        run_online)
from .solver import GatherTables, SolveResult, color, gather, mincost, minsplit, solve
from .strategies import (STRATEGY_NAMES, brute_force, place, place_all_blue,
                         place_all_red, place_level, place_max, place_top)
from .topology import (TreeMetrics, TreeNetwork, build_tree, from_json_dict,
                       load_topology, save_topology, traversal_orders)

__all__ = [
    "AggTreeError",
    "CapacityLedger",
    "EdgeUtilization",
    "GatherTables",
    "PayloadModel",
    "Placement",
    "ScenarioConfig",
    "SolveResult",
    "STRATEGY_NAMES",
    "TreeMetrics",
    "TreeNetwork",
    "brute_force",
    "build_tree",
    "color",
    "from_json_dict",
    "gather",
    "gen_complete_binary",
    "gen_loads",
    "gen_payloads",
    "gen_rpa",
    "gen_workloads",
    "load_topology",
    "mincost",
    "minsplit",
    "place",
    "place_all_blue",
    "place_all_red",
    "place_level",
    "place_max",
    "place_top",
    "run_online",
    "save_topology",
    "simulate_bytes",
    "simulate_reduce",
    "solve",
    "total_utilization",
    "traversal_orders",
    "utilization_barrier",
]

__version__ = "0.1.0"
