"""
Scene graph and network weight models
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError


def _finite(name: str, array: NDArray) -> NDArray[np.float64]:
    array = np.asarray(array, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return array


@dataclass(frozen=True)
class SceneGraph:
    """
    Fully connected object graph of one submap

    centroids (K×3, meters) and features (K×F) describe the nodes; edges is
    the dense symmetric K×K matrix of normalized distances with a zero
    diagonal. enriched_* are filled by the message-passing network and
    embedding by pooling. cells optionally keeps each node's voxel centroids
    for dense refinement.
    """

    centroids: NDArray[np.float64]
    features: NDArray[np.float64]
    edges: NDArray[np.float64]
    class_ids: NDArray[np.int64]
    alpha: float
    enriched_centroids: Optional[NDArray[np.float64]] = None
    enriched_features: Optional[NDArray[np.float64]] = None
    embedding: Optional[NDArray[np.float64]] = None
    cells: Optional[Tuple[NDArray[np.float64], ...]] = None

    def __post_init__(self) -> None:
        centroids = _finite("centroids", self.centroids).reshape(-1, 3)
        k = centroids.shape[0]
        features = _finite("features", self.features)
        if features.ndim != 2 or features.shape[0] != k:
            raise InvalidInputError(f"Expected {k} feature rows, got shape {features.shape}")
        edges = _finite("edges", self.edges).reshape(k, k)
        if np.any(edges < 0.0) or not np.array_equal(edges, edges.T):
            raise InvalidInputError("Edge matrix must be symmetric and non-negative")
        if k and np.any(np.diag(edges) != 0.0):
            raise InvalidInputError("Edge matrix must have a zero diagonal")
        class_ids = np.asarray(self.class_ids, dtype=np.int64).reshape(k)

        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "class_ids", class_ids)

        if self.enriched_features is not None:
            enriched = _finite("enriched features", self.enriched_features)
            coords = _finite("enriched centroids", self.enriched_centroids).reshape(-1, 3)
            if enriched.shape[0] != k or coords.shape[0] != k:
                raise InvalidInputError("Enriched graph must keep the node count")
            object.__setattr__(self, "enriched_features", enriched)
            object.__setattr__(self, "enriched_centroids", coords)
        if self.embedding is not None:
            object.__setattr__(self, "embedding", _finite("embedding", self.embedding).reshape(-1))
        if self.cells is not None:
            if len(self.cells) != k:
                raise InvalidInputError("cells must hold one array per node")
            object.__setattr__(
                self, "cells", tuple(np.asarray(c, dtype=np.float64).reshape(-1, 3) for c in self.cells)
            )

    @property
    def num_nodes(self) -> int:
        return int(self.centroids.shape[0])

    def with_enrichment(self, centroids: NDArray, features: NDArray) -> "SceneGraph":
        return replace(self, enriched_centroids=centroids, enriched_features=features)

    def with_embedding(self, embedding: NDArray) -> "SceneGraph":
        return replace(self, embedding=embedding)


@dataclass(frozen=True)
class LinearWeights:
    """Affine map y = W·x + b with W of shape (out, in)"""

    weight: NDArray[np.float64]
    bias: NDArray[np.float64]

    def __post_init__(self) -> None:
        weight = _finite("weight", self.weight)
        bias = _finite("bias", self.bias).reshape(-1)
        if weight.ndim != 2 or bias.shape[0] != weight.shape[0]:
            raise InvalidInputError(f"Inconsistent linear shapes {weight.shape} / {bias.shape}")
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)

    @property
    def in_dim(self) -> int:
        return int(self.weight.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weight.shape[0])

    def __call__(self, x: NDArray) -> NDArray[np.float64]:
        return x @ self.weight.T + self.bias

    def zeroed(self) -> "LinearWeights":
        return LinearWeights(np.zeros_like(self.weight), np.zeros_like(self.bias))


@dataclass(frozen=True)
class EgnnLayerWeights:
    """
    One equivariant message-passing layer

    edge_in takes [h_i, h_j, ‖x_i − x_j‖²/α², e_ij]; coord_out produces the
    scalar weight of each difference vector; node_in takes [h_i, m_i].
    """

    edge_in: LinearWeights
    edge_out: LinearWeights
    coord_hidden: LinearWeights
    coord_out: LinearWeights
    node_in: LinearWeights
    node_out: LinearWeights

    @property
    def hidden_dim(self) -> int:
        return self.edge_out.out_dim


@dataclass(frozen=True)
class NetWeights:
    """All parameters of the graph encoder, pooling and score head"""

    embed: LinearWeights
    layers: Tuple[EgnnLayerWeights, ...]
    readout: LinearWeights
    gem_lambda: float
    projection: LinearWeights
    tnn_slices: NDArray[np.float64]
    tnn_pair: NDArray[np.float64]
    tnn_bias: NDArray[np.float64]
    tnn_out: LinearWeights

    def __post_init__(self) -> None:
        if not (np.isfinite(self.gem_lambda) and self.gem_lambda > 0):
            raise InvalidInputError("GeM lambda must be positive and finite")
        slices = _finite("tnn slices", self.tnn_slices)
        pair = _finite("tnn pair map", self.tnn_pair)
        bias = _finite("tnn bias", self.tnn_bias).reshape(-1)
        s = slices.shape[0]
        if slices.ndim != 3 or slices.shape[1] != slices.shape[2]:
            raise InvalidInputError(f"TNN slices must be s×d×d, got {slices.shape}")
        if pair.shape != (s, 2 * slices.shape[1]) or bias.shape != (s,) or self.tnn_out.in_dim != s:
            raise InvalidInputError("TNN head shapes are inconsistent with the slice count")
        object.__setattr__(self, "tnn_slices", slices)
        object.__setattr__(self, "tnn_pair", pair)
        object.__setattr__(self, "tnn_bias", bias)

    @property
    def descriptor_dim(self) -> int:
        return self.embed.in_dim

    @property
    def enriched_dim(self) -> int:
        return self.readout.out_dim

    @property
    def embedding_dim(self) -> int:
        return self.projection.out_dim

    @property
    def num_slices(self) -> int:
        return int(self.tnn_slices.shape[0])

    def without_coordinate_updates(self) -> "NetWeights":
        """Copy whose layers leave node coordinates untouched"""
        layers = tuple(replace(layer, coord_out=layer.coord_out.zeroed()) for layer in self.layers)
        return replace(self, layers=layers)
