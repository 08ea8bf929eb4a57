"""Robust W_q Wasserstein barycenters of persistence diagrams."""

__version__ = "0.1.0"

from .assignment import brute_force_assignment, build_cost_matrix, solve_assignment
from .barycenter import (
    BarycenterConfig,
    WassersteinBarycenter,
    compute_barycenter,
    frechet_energy,
)
from .clustering import PersistenceDiagramKMeans, adjusted_rand_index, kmeans, kmeans_pp_init
from .diagram import PersistenceDiagram, augment, project_to_diagonal, prune
from .dictionary import (
    EncodeConfig,
    WassersteinDictionary,
    encode,
    encoding_energy,
    fd_gradient_check,
    planar_layout,
    reconstruct,
)
from .extract import MaxPairExtractor, ScalarGrid, extract_max_pairs, threshold_top_k
from .ground import GroundProblem, ground_barycenter, grid_search_oracle
from .metric import cross_distances, distance_matrix, wasserstein_distance

__all__ = [
    "BarycenterConfig",
    "EncodeConfig",
    "GroundProblem",
    "MaxPairExtractor",
    "PersistenceDiagram",
    "PersistenceDiagramKMeans",
    "ScalarGrid",
    "WassersteinBarycenter",
    "WassersteinDictionary",
    "adjusted_rand_index",
    "augment",
    "brute_force_assignment",
    "build_cost_matrix",
    "compute_barycenter",
    "cross_distances",
    "distance_matrix",
    "encode",
    "encoding_energy",
    "extract_max_pairs",
    "fd_gradient_check",
    "frechet_energy",
    "grid_search_oracle",
    "ground_barycenter",
    "kmeans",
    "kmeans_pp_init",
    "planar_layout",
    "project_to_diagonal",
    "prune",
    "reconstruct",
    "solve_assignment",
    "threshold_top_k",
    "wasserstein_distance",
]
