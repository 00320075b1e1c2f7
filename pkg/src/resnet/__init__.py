"""Average effective resistance of unit-resistor networks.

Library surface: multigraph types and structural operators, resistance
solvers with independent oracles, the graph constructions and rootings,
closed-form and certificate bounds, and exhaustive small-case search.
"""

from .multigraph import (
    Multigraph,
    RootedGraph,
    WeightedNetwork,
    canonical_form,
    contract_edge_add_leaf,
    girth,
    is_connected,
    merge_vertices,
    read_edge_list,
    write_edge_list,
)
from .resistance import (
    CurrentFlow,
    InfiniteResistanceError,
    ResistanceSummary,
    RootedSummary,
    current_via_spanning_trees,
    flow_power,
    kirchhoff_index_by_eigenvalues,
    pair_resistance,
    resistance_summary,
    rooted_summary,
    superpose,
    unit_current_flow,
    weighted_pair_resistance,
)

__all__ = [
    "Multigraph",
    "RootedGraph",
    "WeightedNetwork",
    "canonical_form",
    "contract_edge_add_leaf",
    "girth",
    "is_connected",
    "merge_vertices",
    "read_edge_list",
    "write_edge_list",
    "CurrentFlow",
    "InfiniteResistanceError",
    "ResistanceSummary",
    "RootedSummary",
    "current_via_spanning_trees",
    "flow_power",
    "kirchhoff_index_by_eigenvalues",
    "pair_resistance",
    "resistance_summary",
    "rooted_summary",
    "superpose",
    "unit_current_flow",
    "weighted_pair_resistance",
]

__version__ = "0.1.0"
