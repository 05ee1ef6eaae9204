"""Heterogeneity analytics: everything computed from the analyzed client's view.

These operations consume only the federated parameter sequence, the client's
own local updates, and the client's own dataset; they never import the
federation loop or other clients' data.
"""

from .clustering import (Dendrogram, Merge, average_linkage, cluster_inconsistent,
                         recommend_cluster_count, within_cluster_mean)
from .cpca import (ALPHA_GRID, DEFAULT_ALPHA, ContrastivePCA, Projection2D,
                   ccpca_project, dimension_weights, recommend_alpha,
                   separation_score)
from .distributions import dimension_distribution
from .gradcam import GradCAMPair, class_activation_map, grad_cam_pair
from .inconsistency import InconsistencyReport, find_inconsistent
from .inputs import SubspaceSampler, choose_subspace_dims, generate_inputs, pca_basis
from .labelmatrix import label_matrix
from .rankdist import neighbor_ranks, pairwise_distances_to_all, rank_distance_matrix
from .summaries import (DEFAULT_GRID, ClusterSummary, convex_hull, density_grid,
                        summarize_clusters)
from .trajectory import (ParamTrajectory, project_parameters, randomized_top_basis,
                         round_metrics)

DEFAULT_CLUSTER_COUNT = 8

__all__ = [
    "ALPHA_GRID", "DEFAULT_ALPHA", "DEFAULT_CLUSTER_COUNT", "DEFAULT_GRID",
    "ClusterSummary", "ContrastivePCA", "Dendrogram", "GradCAMPair",
    "InconsistencyReport", "Merge", "ParamTrajectory", "Projection2D",
    "SubspaceSampler", "average_linkage", "ccpca_project", "choose_subspace_dims",
    "class_activation_map", "cluster_inconsistent", "convex_hull", "density_grid",
    "dimension_distribution", "dimension_weights", "find_inconsistent",
    "generate_inputs", "grad_cam_pair", "label_matrix", "neighbor_ranks",
    "pairwise_distances_to_all", "pca_basis", "project_parameters",
    "randomized_top_basis", "rank_distance_matrix", "recommend_alpha",
    "recommend_cluster_count", "round_metrics", "separation_score",
    "summarize_clusters", "within_cluster_mean",
]
