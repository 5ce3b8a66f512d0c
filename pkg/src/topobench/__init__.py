"""Throughput and sparse-cut benchmarking for data center network topologies."""

from .graph import Network, all_pairs_shortest_paths, export_edge_list, import_edge_list, validate
from .throughput import solve, solve_approx, solve_exact, verify_solution, volumetric_upper_bound
from .topologies import TopoSpec
from .traffic import TrafficMatrix, build_tm, tm_all_to_all, tm_longest_matching, tm_random_matching

__version__ = "0.1.0"

__all__ = [
    "Network",
    "TopoSpec",
    "TrafficMatrix",
    "all_pairs_shortest_paths",
    "build_tm",
    "export_edge_list",
    "import_edge_list",
    "solve",
    "solve_approx",
    "solve_exact",
    "tm_all_to_all",
    "tm_longest_matching",
    "tm_random_matching",
    "validate",
    "verify_solution",
    "volumetric_upper_bound",
]
