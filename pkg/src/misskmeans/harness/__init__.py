"""File formats, instance generators, benchmarks and the command line."""

from .generators import Graph, gen_mixture, graph_to_instance, cycle_graph, complete_graph
from .io import read_csv, write_csv, read_edges, write_edges, clustering_to_json, read_centers

__all__ = [
    "Graph",
    "gen_mixture",
    "graph_to_instance",
    "cycle_graph",
    "complete_graph",
    "read_csv",
    "write_csv",
    "read_edges",
    "write_edges",
    "clustering_to_json",
    "read_centers",
]
