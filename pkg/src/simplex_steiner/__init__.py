"""Euclidean Steiner trees on regular simplices and related configurations."""
from __future__ import annotations

from .construct import (
    RATIO_LIMIT,
    CandidateTree,
    ConstructionError,
    double,
    iterate_double,
    pow2_simplex_tree,
    ratio_sequence,
    simplex_base_tree,
)
from .embed import (
    Graph,
    conjecture3_scan,
    contract_pair,
    cover_to_partition,
    embed_graph,
    make_reduction_instance,
    partition_to_cover,
)
from .geometry import fermat_point, split
from .solver import (
    SteinerTree,
    mst_cost,
    optimal_steiner_tree,
    regular_simplex,
    relatively_minimal,
    steiner_ratio,
)
from .topology import (
    Topology,
    conjectured_topology,
    enumerate_full_topologies,
    good_tree,
    is_semi_regular,
    terminal_wiener,
)
from .verify import VerificationReport, verify_tree

__version__ = "0.1.0"
