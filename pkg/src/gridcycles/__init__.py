"""Parameterized cycle, path, FVS and packing solvers for unit disk/square graphs.

The library models a point cloud in the plane as a unit disk (or unit
square) graph, snaps it to a grid of clique cells, and runs
decomposition-based dynamic programs whose states grow with the square
root of the parameter: exact k-cycle, longest path, longest cycle,
feedback vertex set, and vertex-disjoint cycle packing, each with
optional verifiable witnesses and brute-force reference oracles.
"""
from .cliquegrid import (
    CellGraph,
    CliqueGridInstance,
    as_instance,
    cell_graph,
    contract_pair,
    contractible_pairs,
    first_contractible_pair,
    instance_from_points,
    is_backbone,
    minimal_backbone,
    read_representation,
    write_representation,
)
from .cycle_solvers import (
    SolveResult,
    dp_exact_cycle,
    enumerate_clique_profiles,
    exact_k_cycle,
    good_family,
    longest_cycle,
    longest_path,
    near_k_cycle,
    tw_longest_cycle,
)
from .decomp import (
    BakerNCPD,
    CellNCTD,
    NiceTreeDecomposition,
    SearchBudgetExceeded,
    TreeDecomposition,
    WidthExceeded,
    annotate_edges,
    build_baker_ncpd,
    build_cell_nctd,
    exact_treewidth,
    make_nice,
    read_td,
    verify_baker_ncpd,
    verify_cell_nctd,
    verify_nice_decomposition,
    verify_tree_decomposition,
    write_td,
)
from .geometry import (
    GeometricModel,
    PointCloud,
    Representation,
    build_geometric_graph,
    compute_representation,
    read_gr,
    read_point_file,
    verify_representation,
    write_gr,
    write_point_file,
)
from .graphs import SimpleGraph
from .hitting_packing import cycle_packing, fvs, mif_dp, packing_dp
from .kernel import (
    KernelOutput,
    KernelWindow,
    detect_stretched,
    large_clique_cell,
    turing_kernel,
)
from .oracle import (
    OracleBudget,
    OracleBudgetExceeded,
    brute_cycle_packing,
    brute_exact_cycle,
    brute_fvs,
    brute_longest_cycle,
    brute_longest_path,
    brute_treewidth,
)
from .witness import Witness, verify_witness

__version__ = "0.1.0"

__all__ = [
    "BakerNCPD",
    "CellGraph",
    "CellNCTD",
    "CliqueGridInstance",
    "GeometricModel",
    "KernelOutput",
    "KernelWindow",
    "NiceTreeDecomposition",
    "OracleBudget",
    "OracleBudgetExceeded",
    "PointCloud",
    "Representation",
    "SearchBudgetExceeded",
    "SimpleGraph",
    "SolveResult",
    "TreeDecomposition",
    "WidthExceeded",
    "Witness",
    "annotate_edges",
    "as_instance",
    "brute_cycle_packing",
    "brute_exact_cycle",
    "brute_fvs",
    "brute_longest_cycle",
    "brute_longest_path",
    "brute_treewidth",
    "build_baker_ncpd",
    "build_cell_nctd",
    "build_geometric_graph",
    "cell_graph",
    "compute_representation",
    "contract_pair",
    "contractible_pairs",
    "cycle_packing",
    "detect_stretched",
    "dp_exact_cycle",
    "enumerate_clique_profiles",
    "exact_k_cycle",
    "exact_treewidth",
    "first_contractible_pair",
    "fvs",
    "good_family",
    "instance_from_points",
    "is_backbone",
    "large_clique_cell",
    "longest_cycle",
    "longest_path",
    "make_nice",
    "mif_dp",
    "minimal_backbone",
    "near_k_cycle",
    "packing_dp",
    "read_gr",
    "read_point_file",
    "read_representation",
    "read_td",
    "turing_kernel",
    "tw_longest_cycle",
    "verify_baker_ncpd",
    "verify_cell_nctd",
    "verify_nice_decomposition",
    "verify_representation",
    "verify_tree_decomposition",
    "verify_witness",
    "write_gr",
    "write_point_file",
    "write_representation",
    "write_td",
]
