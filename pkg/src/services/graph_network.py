"""
Scene graph network

Builds the fully connected object graph of a submap, enriches it with
E(3)-equivariant message passing, pools a global embedding with generalized
mean pooling and scores submap pairs with a tensor (bilinear-slice) head.
Everything is a forward pass in float64 numpy; there is no training here.
"""

import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist, squareform
from scipy.special import expit

from ..config import ConfigurationError
from ..database.records import load_weights
from ..errors import InvalidInputError
from ..models import (
    DESCRIPTOR_DIM,
    EgnnLayerWeights,
    LinearWeights,
    NetWeights,
    ObjectInstance,
    SceneGraph,
)


logger = logging.getLogger(__name__)

GEM_CLAMP = 1e-6
SCORE_CLIP = 1e-12
ALPHA_QUANTILE = 0.95
# small output gains keep the residual updates close to identity at init
COORD_GAIN = 1e-3
NODE_GAIN = 0.1


def build_graph(
    instances: Sequence[ObjectInstance],
    descriptors: NDArray,
    alpha: float,
    keep_cells: bool = True,
) -> SceneGraph:
    """
    Fully connected scene graph

    Node i carries the instance centroid c_i and its descriptor; edges are
    e_ij = ‖c_i − c_j‖ / alpha for every i ≠ j.
    """
    if not alpha > 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if len(instances) == 0:
        raise InvalidInputError("A scene graph needs at least one object")
    descriptors = np.asarray(descriptors, dtype=np.float64)
    if descriptors.shape[0] != len(instances):
        raise InvalidInputError(
            f"Got {descriptors.shape[0]} descriptors for {len(instances)} instances"
        )

    centroids = np.stack([inst.centroid for inst in instances])
    edges = squareform(pdist(centroids)) / alpha if len(instances) > 1 else np.zeros((1, 1))

    return SceneGraph(
        centroids=centroids,
        features=descriptors,
        edges=edges,
        class_ids=np.array([inst.class_id for inst in instances], dtype=np.int64),
        alpha=float(alpha),
        cells=tuple(inst.cells for inst in instances) if keep_cells else None,
    )


def empty_graph(alpha: float, embedding_dim: int, feature_dim: int = DESCRIPTOR_DIM) -> SceneGraph:
    """Graph of a submap without objects; its embedding is all zeros"""
    return SceneGraph(
        centroids=np.zeros((0, 3)),
        features=np.zeros((0, feature_dim)),
        edges=np.zeros((0, 0)),
        class_ids=np.zeros(0, dtype=np.int64),
        alpha=float(alpha),
        embedding=np.zeros(embedding_dim),
        cells=(),
    )


def instance_diameter(cells: NDArray) -> float:
    """Largest distance between two cells of one instance"""
    cells = np.asarray(cells, dtype=np.float64).reshape(-1, 3)
    if cells.shape[0] < 2:
        return 0.0
    if cells.shape[0] > 4:
        try:
            cells = cells[ConvexHull(cells).vertices]
        except (RuntimeError, ValueError):
            # flat or collinear instances have no 3-d hull
            pass
    return float(pdist(cells).max())


def compute_alpha(instances: Iterable[ObjectInstance], quantile: float = ALPHA_QUANTILE) -> float:
    """Edge normalizer: quantile of per-instance diameters over a training split"""
    diameters = np.array([instance_diameter(inst.cells) for inst in instances])
    if diameters.size == 0:
        raise InvalidInputError("compute_alpha needs at least one instance")
    alpha = float(np.quantile(diameters, quantile))
    if not alpha > 0:
        raise InvalidInputError("All instances are single points; alpha would be zero")
    logger.info(f"alpha = {alpha:.3f} m from {diameters.size} instances")
    return alpha


def _linear(rng: np.random.Generator, in_dim: int, out_dim: int, gain: float = 1.0) -> LinearWeights:
    bound = gain / np.sqrt(in_dim)
    return LinearWeights(
        weight=rng.uniform(-bound, bound, size=(out_dim, in_dim)),
        bias=rng.uniform(-bound, bound, size=out_dim),
    )


def initialize_weights(
    seed: int = 0,
    descriptor_dim: int = DESCRIPTOR_DIM,
    hidden_dim: int = 256,
    layers: int = 3,
    enriched_dim: int = 512,
    embedding_dim: int = 256,
    slices: int = 16,
    gem_lambda: float = 3.0,
) -> NetWeights:
    """Randomly initialized network weights from a seeded generator"""
    rng = np.random.default_rng(seed)
    egnn = tuple(
        EgnnLayerWeights(
            edge_in=_linear(rng, 2 * hidden_dim + 2, hidden_dim),
            edge_out=_linear(rng, hidden_dim, hidden_dim),
            coord_hidden=_linear(rng, hidden_dim, hidden_dim),
            coord_out=_linear(rng, hidden_dim, 1, gain=COORD_GAIN),
            node_in=_linear(rng, 2 * hidden_dim, hidden_dim),
            node_out=_linear(rng, hidden_dim, hidden_dim, gain=NODE_GAIN),
        )
        for _ in range(layers)
    )
    slice_bound = 1.0 / embedding_dim
    return NetWeights(
        embed=_linear(rng, descriptor_dim, hidden_dim),
        layers=egnn,
        readout=_linear(rng, hidden_dim, enriched_dim),
        gem_lambda=gem_lambda,
        projection=_linear(rng, enriched_dim, embedding_dim),
        tnn_slices=rng.uniform(-slice_bound, slice_bound, size=(slices, embedding_dim, embedding_dim)),
        tnn_pair=rng.uniform(-slice_bound, slice_bound, size=(slices, 2 * embedding_dim)),
        tnn_bias=np.zeros(slices),
        tnn_out=_linear(rng, slices, 1),
    )


def _silu(x: NDArray) -> NDArray:
    return x * expit(x)


def _egnn_layer(
    h: NDArray, x: NDArray, edges: NDArray, alpha: float, layer: EgnnLayerWeights
) -> Tuple[NDArray, NDArray]:
    """One message-passing step; returns updated (h, x)"""
    k, hidden = h.shape
    diff = x[:, None, :] - x[None, :, :]
    dist_sq = np.einsum("ijc,ijc->ij", diff, diff) / (alpha * alpha)

    edge_input = np.concatenate(
        [
            np.broadcast_to(h[:, None, :], (k, k, hidden)),
            np.broadcast_to(h[None, :, :], (k, k, hidden)),
            dist_sq[..., None],
            edges[..., None],
        ],
        axis=-1,
    )
    messages = _silu(layer.edge_out(_silu(layer.edge_in(edge_input))))
    neighbours = ~np.eye(k, dtype=bool)
    messages = messages * neighbours[..., None]
    denominator = max(k - 1, 1)

    coord_weights = layer.coord_out(_silu(layer.coord_hidden(messages)))[..., 0] * neighbours
    x = x + np.einsum("ij,ijc->ic", coord_weights, diff) / denominator

    aggregated = messages.sum(axis=1) / denominator
    h = h + layer.node_out(_silu(layer.node_in(np.concatenate([h, aggregated], axis=1))))
    return h, x


def egnn_forward(graph: SceneGraph, weights: NetWeights) -> SceneGraph:
    """
    Equivariant message passing over the scene graph

    Messages depend only on node features, squared centroid distances
    (normalized by alpha²) and the edge values, so features come out invariant
    and coordinates equivariant to rigid motions of the centroids. Returns a
    graph with K updated coordinates and K enriched features.
    """
    if graph.features.shape[1] != weights.descriptor_dim:
        raise ConfigurationError(
            f"Node features have {graph.features.shape[1]} dims, weights expect {weights.descriptor_dim}"
        )
    if graph.num_nodes == 0:
        return graph.with_enrichment(np.zeros((0, 3)), np.zeros((0, weights.enriched_dim)))

    h = weights.embed(graph.features)
    x = graph.centroids.copy()
    for layer in weights.layers:
        h, x = _egnn_layer(h, x, graph.edges, graph.alpha, layer)

    enriched = np.maximum(weights.readout(h), 0.0)
    return graph.with_enrichment(x, enriched)


def gem_pool_features(features: NDArray, gem_lambda: float) -> NDArray[np.float64]:
    """Elementwise generalized mean ((1/K) Σ f^λ)^(1/λ) after clamping at 1e-6"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InvalidInputError("GeM pooling needs a non-empty K×D feature matrix")
    if not gem_lambda > 0:
        raise InvalidInputError(f"GeM lambda must be positive, got {gem_lambda}")
    clamped = np.maximum(features, GEM_CLAMP)
    return np.mean(clamped ** gem_lambda, axis=0) ** (1.0 / gem_lambda)


def gem_pool(features: NDArray, weights: NetWeights) -> NDArray[np.float64]:
    """Global embedding g: GeM over nodes, then the learned projection"""
    pooled = gem_pool_features(features, weights.gem_lambda)
    if pooled.shape[0] != weights.projection.in_dim:
        raise ConfigurationError(
            f"Pooled features have {pooled.shape[0]} dims, projection expects {weights.projection.in_dim}"
        )
    return weights.projection(pooled)


def tnn_score(g_i: NDArray, g_j: NDArray, weights: NetWeights) -> float:
    """Pair similarity in (0, 1) from the bilinear-slice head"""
    g_i = np.asarray(g_i, dtype=np.float64).reshape(-1)
    g_j = np.asarray(g_j, dtype=np.float64).reshape(-1)
    bilinear = np.einsum("d,kde,e->k", g_i, weights.tnn_slices, g_j)
    hidden = np.maximum(bilinear + weights.tnn_pair @ np.concatenate([g_i, g_j]) + weights.tnn_bias, 0.0)
    logit = float(weights.tnn_out(hidden)[0])
    return float(np.clip(expit(logit), SCORE_CLIP, 1.0 - SCORE_CLIP))


def embed_graph(graph: SceneGraph, weights: NetWeights) -> SceneGraph:
    """Enrich a graph and attach its global embedding"""
    if graph.num_nodes == 0:
        return graph.with_embedding(np.zeros(weights.embedding_dim))
    enriched = egnn_forward(graph, weights)
    return enriched.with_embedding(gem_pool(enriched.enriched_features, weights))


def load_or_initialize_weights(path: Optional[str], **dims) -> NetWeights:
    """Weights from an RGRC file, or seeded random weights when no path is given"""
    if path:
        return load_weights(path)
    return initialize_weights(**dims)
