"""Separation profiles, isoperimetric profiles and Cheeger constants on
finite windows of infinite graphs."""

__version__ = "0.1.0"

from .graph import (
    CutResult,
    Graph,
    GrowthTable,
    VertexSet,
    ball,
    edge_boundary,
    enumerate_connected_subsets,
    growth_table,
    induced_subgraph,
    internal_boundary,
)
from .graphio import read_graph, write_graph
from .generators import (
    CarpetPattern,
    GroupSpec,
    PercolationConfig,
    cayley_ball,
    lattice_window,
    percolation_cluster,
    sierpinski_carpet,
)
from .cuts import (
    CheegerInterval,
    ball_shell_cut,
    cheeger_exact,
    cheeger_sweep,
    doubling_shell_search,
    flow_lower_bound,
)
from .profiles import (
    OptimalSetRecord,
    ProfileTable,
    iso_profile,
    local_sep,
    optimal_integers,
    sep_exact,
    sep_lower_envelope,
)
from .bounds import (
    BoundExpr,
    ChainWitness,
    FitReport,
    chain_lower_bound,
    chain_lower_bound_symmetric,
    decay_lower_bound,
    distortion,
    evaluate_bound,
    fit_and_compare,
    geometric_decay,
    jv_consistency,
)
