"""Hypersphere numbers, Lovasz theta variants and ellipsoidal unit-distance
numbers of small graphs, with an embedded SDP solver."""

__version__ = "0.1.0"

from .graph import Graph, complement, generate, parse_graph, read_graph  # noqa: E402
from .programs import t_invariant, theta, theta_bar  # noqa: E402

__all__ = [
    "Graph",
    "complement",
    "generate",
    "parse_graph",
    "read_graph",
    "t_invariant",
    "theta",
    "theta_bar",
]
