"""
Persistence of pipeline artifacts in RGRC containers

Submaps, extracted graph records, the retrieval index and network weights.
Embeddings are stored as float32, poses, centroids and descriptors as float64,
object cells as float32.
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..models import (
    EgnnLayerWeights,
    IndexRecord,
    LinearWeights,
    NetWeights,
    Pose,
    SceneGraph,
    SemanticVoxelGrid,
    Submap,
)
from .container import ContainerFormatError, ContainerReader, ContainerWriter, PayloadType


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUBMAP_RECORD = np.dtype(
    [
        ("id", "<i8"),
        ("timestamp", "<f8"),
        ("voxel_size", "<f8"),
        ("origin", "<f8", (12,)),
        ("cells", "<u8"),
    ]
)

GRAPH_RECORD = np.dtype(
    [
        ("id", "<i8"),
        ("timestamp", "<f8"),
        ("pose", "<f8", (12,)),
        ("alpha", "<f8"),
        ("nodes", "<u8"),
        ("feature_dim", "<u4"),
        ("enriched_dim", "<u4"),
        ("cell_total", "<u8"),
    ]
)

WEIGHT_RECORD = np.dtype(
    [
        ("name", "S48"),
        ("ndim", "<u4"),
        ("shape", "<u8", (4,)),
    ]
)

_LINEAR_NAMES = ("edge_in", "edge_out", "coord_hidden", "coord_out", "node_in", "node_out")


def _pose_row(pose: Pose) -> np.ndarray:
    return pose.as_matrix()[:3].reshape(12)


def _pose_from_row(row: np.ndarray) -> Pose:
    return Pose.from_matrix(np.asarray(row, dtype=np.float64).reshape(3, 4))


# Submaps

def save_submaps(path: PathLike, submaps: Sequence[Submap]) -> None:
    """Write submaps in id order; all grids must share one class count"""
    classes = {s.grid.num_classes for s in submaps if len(s.grid)}
    if len(classes) > 1:
        raise ContainerFormatError(f"Submaps disagree on the number of classes: {sorted(classes)}")
    num_classes = classes.pop() if classes else 0

    with ContainerWriter(path, PayloadType.SUBMAPS, len(submaps), num_classes) as writer:
        for submap in sorted(submaps, key=lambda s: s.id):
            grid = submap.grid
            record = np.zeros(1, dtype=SUBMAP_RECORD)
            record[0] = (submap.id, submap.timestamp, grid.voxel_size, _pose_row(submap.origin), len(grid))
            writer.write(record, SUBMAP_RECORD)
            writer.write(grid.keys, "<i8")
            writer.write(grid.counts, "<i8")
            writer.write(grid.centroids, "<f8")
            writer.write(grid.probs.reshape(len(grid), num_classes), "<f8")


def load_submaps(path: PathLike) -> List[Submap]:
    """Read every submap of a container"""
    reader = ContainerReader(path, PayloadType.SUBMAPS)
    num_classes = reader.dim
    submaps = []
    for _ in range(reader.count):
        record = reader.read(SUBMAP_RECORD, 1)[0]
        n = int(record["cells"])
        grid = SemanticVoxelGrid(
            voxel_size=float(record["voxel_size"]),
            keys=reader.read("<i8", 3 * n, (n, 3)),
            counts=reader.read("<i8", n),
            centroids=reader.read("<f8", 3 * n, (n, 3)),
            probs=reader.read("<f8", n * num_classes, (n, num_classes)),
        )
        submaps.append(
            Submap(
                id=int(record["id"]),
                origin=_pose_from_row(record["origin"]),
                timestamp=float(record["timestamp"]),
                grid=grid,
            )
        )
    reader.finish()
    logger.debug(f"Loaded {len(submaps)} submaps from {path}")
    return submaps


# Graph records and index

def save_graph_records(
    path: PathLike, records: Sequence[IndexRecord], payload: PayloadType = PayloadType.GRAPHS
) -> None:
    """Write graph records (extract output or index) in id order"""
    dims = {r.embedding.shape[0] for r in records}
    if len(dims) > 1:
        raise ContainerFormatError(f"Records disagree on the embedding dimension: {sorted(dims)}")
    dim = dims.pop() if dims else 0

    with ContainerWriter(path, payload, len(records), dim) as writer:
        for rec in sorted(records, key=lambda r: r.id):
            graph = rec.graph
            k = graph.num_nodes
            enriched_dim = graph.enriched_features.shape[1] if graph.enriched_features is not None and k else 0
            cells = graph.cells if graph.cells is not None else tuple(np.zeros((0, 3)) for _ in range(k))
            cell_counts = np.array([c.shape[0] for c in cells], dtype=np.uint64)

            header = np.zeros(1, dtype=GRAPH_RECORD)
            header[0] = (
                rec.id,
                rec.timestamp,
                _pose_row(rec.world_pose),
                graph.alpha,
                k,
                graph.features.shape[1],
                enriched_dim,
                int(cell_counts.sum()),
            )
            writer.write(header, GRAPH_RECORD)
            writer.write(rec.embedding, "<f4")
            writer.write(graph.centroids, "<f8")
            writer.write(graph.class_ids, "<i4")
            writer.write(graph.features, "<f8")
            if enriched_dim:
                writer.write(graph.enriched_centroids, "<f8")
                writer.write(graph.enriched_features, "<f4")
            writer.write(cell_counts, "<u8")
            if k:
                writer.write(np.concatenate(cells, axis=0), "<f4")


def load_graph_records(path: PathLike, payload: PayloadType = PayloadType.GRAPHS) -> List[IndexRecord]:
    """Read graph records written by save_graph_records"""
    reader = ContainerReader(path, payload)
    dim = reader.dim
    records = []
    for _ in range(reader.count):
        header = reader.read(GRAPH_RECORD, 1)[0]
        k = int(header["nodes"])
        feature_dim = int(header["feature_dim"])
        enriched_dim = int(header["enriched_dim"])

        embedding = reader.read("<f4", dim).astype(np.float64)
        centroids = reader.read("<f8", 3 * k, (k, 3))
        class_ids = reader.read("<i4", k).astype(np.int64)
        features = reader.read("<f8", k * feature_dim, (k, feature_dim))
        enriched_centroids = enriched_features = None
        if enriched_dim:
            enriched_centroids = reader.read("<f8", 3 * k, (k, 3))
            enriched_features = reader.read("<f4", k * enriched_dim, (k, enriched_dim)).astype(np.float64)
        cell_counts = reader.read("<u8", k).astype(np.int64)
        flat_cells = reader.read("<f4", 3 * int(header["cell_total"]), (-1, 3)).astype(np.float64)
        cells = tuple(np.split(flat_cells, np.cumsum(cell_counts)[:-1])) if k else ()

        centroid_distances = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=-1)
        graph = SceneGraph(
            centroids=centroids,
            features=features,
            edges=np.maximum(centroid_distances, centroid_distances.T) / float(header["alpha"]),
            class_ids=class_ids,
            alpha=float(header["alpha"]),
            enriched_centroids=enriched_centroids,
            enriched_features=enriched_features,
            embedding=embedding,
            cells=cells,
        )
        records.append(
            IndexRecord(
                id=int(header["id"]),
                timestamp=float(header["timestamp"]),
                embedding=embedding,
                graph=graph,
                world_pose=_pose_from_row(header["pose"]),
            )
        )
    reader.finish()
    logger.debug(f"Loaded {len(records)} graph records from {path}")
    return records


def save_index(path: PathLike, records: Sequence[IndexRecord]) -> None:
    save_graph_records(path, records, PayloadType.INDEX)


def load_index(path: PathLike) -> List[IndexRecord]:
    return load_graph_records(path, PayloadType.INDEX)


# Network weights

def weights_to_arrays(weights: NetWeights) -> Dict[str, np.ndarray]:
    """Flatten weights into named arrays"""
    arrays: Dict[str, np.ndarray] = {}

    def add_linear(prefix: str, linear: LinearWeights) -> None:
        arrays[f"{prefix}.weight"] = linear.weight
        arrays[f"{prefix}.bias"] = linear.bias

    add_linear("embed", weights.embed)
    for i, layer in enumerate(weights.layers):
        for name in _LINEAR_NAMES:
            add_linear(f"layers.{i}.{name}", getattr(layer, name))
    add_linear("readout", weights.readout)
    arrays["gem_lambda"] = np.array(weights.gem_lambda)
    add_linear("projection", weights.projection)
    arrays["tnn_slices"] = weights.tnn_slices
    arrays["tnn_pair"] = weights.tnn_pair
    arrays["tnn_bias"] = weights.tnn_bias
    add_linear("tnn_out", weights.tnn_out)
    return arrays


def weights_from_arrays(arrays: Dict[str, np.ndarray]) -> NetWeights:
    """Rebuild weights from named arrays"""
    try:
        def linear(prefix: str) -> LinearWeights:
            return LinearWeights(arrays[f"{prefix}.weight"], arrays[f"{prefix}.bias"])

        layer_count = len({name.split(".")[1] for name in arrays if name.startswith("layers.")})
        layers = tuple(
            EgnnLayerWeights(**{name: linear(f"layers.{i}.{name}") for name in _LINEAR_NAMES})
            for i in range(layer_count)
        )
        return NetWeights(
            embed=linear("embed"),
            layers=layers,
            readout=linear("readout"),
            gem_lambda=float(arrays["gem_lambda"]),
            projection=linear("projection"),
            tnn_slices=arrays["tnn_slices"],
            tnn_pair=arrays["tnn_pair"],
            tnn_bias=arrays["tnn_bias"],
            tnn_out=linear("tnn_out"),
        )
    except KeyError as e:
        raise ContainerFormatError(f"Weight file is missing array {e}") from e


def save_weights(path: PathLike, weights: NetWeights) -> None:
    """Write network weights as named float64 arrays"""
    arrays = weights_to_arrays(weights)
    with ContainerWriter(path, PayloadType.WEIGHTS, len(arrays), weights.descriptor_dim) as writer:
        for name, array in arrays.items():
            header = np.zeros(1, dtype=WEIGHT_RECORD)
            shape = np.zeros(4, dtype=np.uint64)
            shape[: array.ndim] = array.shape
            header[0] = (name.encode("ascii"), array.ndim, shape)
            writer.write(header, WEIGHT_RECORD)
            writer.write(array, "<f8")


def load_weights(path: PathLike) -> NetWeights:
    """Read network weights written by save_weights"""
    reader = ContainerReader(path, PayloadType.WEIGHTS)
    arrays: Dict[str, np.ndarray] = {}
    for _ in range(reader.count):
        header = reader.read(WEIGHT_RECORD, 1)[0]
        ndim = int(header["ndim"])
        shape = tuple(int(s) for s in header["shape"][:ndim])
        size = int(np.prod(shape)) if ndim else 1
        arrays[bytes(header["name"]).decode("ascii")] = reader.read("<f8", size, shape)
    reader.finish()
    weights = weights_from_arrays(arrays)
    if weights.descriptor_dim != reader.dim:
        raise ContainerFormatError(
            f"Header dimension {reader.dim} does not match embed input {weights.descriptor_dim}"
        )
    logger.info(f"Loaded network weights from {path}")
    return weights
