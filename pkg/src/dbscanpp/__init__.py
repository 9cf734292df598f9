"""DBSCAN and DBSCAN++ density clustering with an exact KD-tree backend."""

from .cluster import cluster_from_cores, dbscan, dbscan_pp, find_core_points, kcenter_order, sample_kcenter, sample_uniform
from .core import NOISE, AlgoParams, ClusteringResult, ClusterLabels, CoreSet, Dataset, canonicalize_labels, partitions_equal
from .metrics import adjusted_mutual_info, adjusted_rand_index, hausdorff_distance
from .params import epsilon_for_level, m_minimax, m_schedule
from .spatial import SpatialIndex, build_index, nearest_within, range_count, range_query

__all__ = [
    "NOISE",
    "AlgoParams",
    "ClusterLabels",
    "ClusteringResult",
    "CoreSet",
    "Dataset",
    "SpatialIndex",
    "adjusted_mutual_info",
    "adjusted_rand_index",
    "build_index",
    "canonicalize_labels",
    "cluster_from_cores",
    "dbscan",
    "dbscan_pp",
    "epsilon_for_level",
    "find_core_points",
    "hausdorff_distance",
    "kcenter_order",
    "m_minimax",
    "m_schedule",
    "nearest_within",
    "partitions_equal",
    "range_count",
    "range_query",
    "sample_kcenter",
    "sample_uniform",
]
