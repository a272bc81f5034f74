"""Consensus community detection with rough-set approximations.

An ensemble of community assignments from several detector runs is
condensed into rough communities: a lower approximation of nodes that
certainly belong to a community and an upper approximation that also
holds boundary nodes shared with neighbouring communities.
"""

from .benchgen import LARGE_CONFIG, SMALL_CONFIG, GenerationError, LfrConfig, generate_lfr, planted_partition
from .communities import (Cover, Ensemble, Partition, RoughCommunity, RoughCover, crisp_projection, membership,
                          overlapping_nodes)
from .consensus import (K_STRATEGIES, ORPHAN_POLICIES, assign, boundary_granules, granulate, granule_similarity,
                        node_similarity, rc_ccd, select_k)
from .detectors import DETECTORS, greedy_modularity, label_propagation, louvain, modularity
from .graph import Graph, connected_components, induced_subgraph, threshold_graph
from .metrics import core_accuracy, mean_participation, nmi, overlap_confusion, overlapping_nmi, participation_coefficient

__version__ = "0.1.0"

__all__ = [
    "Graph", "connected_components", "induced_subgraph", "threshold_graph",
    "Cover", "Partition", "Ensemble", "RoughCommunity", "RoughCover", "membership", "crisp_projection",
    "overlapping_nodes",
    "node_similarity", "granulate", "select_k", "granule_similarity", "boundary_granules", "assign", "rc_ccd",
    "K_STRATEGIES", "ORPHAN_POLICIES",
    "modularity", "label_propagation", "louvain", "greedy_modularity", "DETECTORS",
    "nmi", "overlapping_nmi", "participation_coefficient", "mean_participation", "core_accuracy", "overlap_confusion",
    "LfrConfig", "SMALL_CONFIG", "LARGE_CONFIG", "GenerationError", "generate_lfr", "planted_partition",
]
