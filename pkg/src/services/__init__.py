"""
Services layer package for GraphLoc
"""

# Geometry
from .geometry import (
    apply,
    relative,
    rotation_angle_deg,
    rotation_error_deg,
    translation_error_m,
    axis_angle_pose,
    nearest_rotation,
    fit_rigid,
)

# Submaps and instances
from .submap_builder import accumulate, build_submaps, voxelize
from .instance_clustering import cluster, dbscan, farthest_point_order, radius_pairs, sample_fixed

# Descriptors and graph network
from .descriptors import (
    DescriptorBackendFactory,
    ReferenceDescriptorBackend,
    describe_instances,
    describe_reference,
    get_descriptor_backend,
)
from .graph_network import (
    build_graph,
    compute_alpha,
    egnn_forward,
    embed_graph,
    empty_graph,
    gem_pool,
    gem_pool_features,
    initialize_weights,
    tnn_score,
)
from .objectives import (
    batch_objective,
    bce_loss,
    bce_loss_grad,
    mine_hard_triplets,
    proximity_label,
    total_loss,
    triplet_loss,
    triplet_loss_grad,
)

# Retrieval and registration
from .place_index import IndexConflictError, PlaceIndex
from .registration import (
    GraphRegistrar,
    InsufficientDataError,
    icp_refine,
    match_features,
    ransac_align,
    register_graphs,
)
from .loop_closure import LoopClosureDetector, consistency_score, pairwise_consistency, rerank_classify
from .evaluation import (
    aggregate_registration,
    eval_place_recognition,
    eval_registration,
    precision_recall_sweep,
    recall_at_k,
)

# Pipeline and synthetic data
from .pipeline import SubmapProcessor, weights_for
from .synthetic import generate_pair, generate_world

__all__ = [
    # Geometry
    "apply",
    "relative",
    "rotation_angle_deg",
    "rotation_error_deg",
    "translation_error_m",
    "axis_angle_pose",
    "nearest_rotation",
    "fit_rigid",

    # Submaps and instances
    "accumulate",
    "build_submaps",
    "voxelize",
    "cluster",
    "dbscan",
    "farthest_point_order",
    "radius_pairs",
    "sample_fixed",

    # Descriptors and graph network
    "DescriptorBackendFactory",
    "ReferenceDescriptorBackend",
    "describe_instances",
    "describe_reference",
    "get_descriptor_backend",
    "build_graph",
    "compute_alpha",
    "egnn_forward",
    "embed_graph",
    "empty_graph",
    "gem_pool",
    "gem_pool_features",
    "initialize_weights",
    "tnn_score",

    # Training objectives
    "batch_objective",
    "bce_loss",
    "bce_loss_grad",
    "mine_hard_triplets",
    "proximity_label",
    "total_loss",
    "triplet_loss",
    "triplet_loss_grad",

    # Retrieval and registration
    "IndexConflictError",
    "PlaceIndex",
    "GraphRegistrar",
    "InsufficientDataError",
    "icp_refine",
    "match_features",
    "ransac_align",
    "register_graphs",
    "LoopClosureDetector",
    "consistency_score",
    "pairwise_consistency",
    "rerank_classify",
    "aggregate_registration",
    "eval_place_recognition",
    "eval_registration",
    "precision_recall_sweep",
    "recall_at_k",

    # Pipeline and synthetic data
    "SubmapProcessor",
    "weights_for",
    "generate_pair",
    "generate_world",
]
