"""
Instance clustering

Same-class voxels are grouped into object instances with DBSCAN on voxel
centroids. Neighbourhoods come from a uniform hash grid of cell size eps, so
the search is linear in expectation and returns exactly the pairs a brute-force
scan would.
"""

import logging
from typing import List, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InvalidInputError
from ..models import ClusterParams, ObjectInstance, SemanticVoxelGrid


logger = logging.getLogger(__name__)

NOISE = -1
DEFAULT_SAMPLE_POINTS = 1024

_NEIGHBOUR_OFFSETS = np.array(
    [(dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)],
    dtype=np.int64,
)


def radius_pairs(points: NDArray, eps: float) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    """
    All ordered pairs (i, j), self pairs included, with ‖p_i − p_j‖² ≤ eps²

    Points are hashed into cubic cells of edge eps; candidate neighbours come
    from the 27 surrounding cells.
    """
    n = points.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

    cells = np.floor(points / eps).astype(np.int64)
    cells -= cells.min(axis=0) - 1
    dims = cells.max(axis=0) + 2
    codes = (cells[:, 0] * dims[1] + cells[:, 1]) * dims[2] + cells[:, 2]

    order = np.argsort(codes, kind="stable")
    unique_codes, starts, counts = np.unique(codes[order], return_index=True, return_counts=True)
    eps_sq = eps * eps

    rows, cols = [], []
    for dx, dy, dz in _NEIGHBOUR_OFFSETS:
        target = codes + (dx * dims[1] + dy) * dims[2] + dz
        slot = np.searchsorted(unique_codes, target)
        slot = np.minimum(slot, unique_codes.shape[0] - 1)
        hit = unique_codes[slot] == target
        if not np.any(hit):
            continue

        query = np.flatnonzero(hit)
        span = counts[slot[hit]]
        first = starts[slot[hit]]
        row = np.repeat(query, span)
        within = np.arange(span.sum()) - np.repeat(np.cumsum(span) - span, span)
        col = order[np.repeat(first, span) + within]

        diff = points[row] - points[col]
        keep = np.einsum("ij,ij->i", diff, diff) <= eps_sq
        rows.append(row[keep])
        cols.append(col[keep])

    return np.concatenate(rows), np.concatenate(cols)


def dbscan(points: NDArray, eps: float, min_samples: int, min_size: int = 1) -> NDArray[np.int64]:
    """
    Density-based clustering of an N×3 array

    A point is core when at least min_samples points (itself included) lie
    within eps. Clusters are connected components of core points; a border
    point joins the cluster of its lowest-index core neighbour; clusters with
    fewer than min_size members become noise. Labels are numbered by the
    smallest member index; noise is -1.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return labels

    rows, cols = radius_pairs(points, eps)
    degree = np.bincount(rows, minlength=n)
    core = degree >= min_samples
    if not np.any(core):
        return labels

    core_edges = core[rows] & core[cols]
    adjacency = coo_matrix(
        (np.ones(int(core_edges.sum()), dtype=np.int8), (rows[core_edges], cols[core_edges])),
        shape=(n, n),
    ).tocsr()
    _, components = connected_components(adjacency, directed=False)
    labels[core] = components[core]

    border_edges = ~core[rows] & core[cols]
    best_core = np.full(n, n, dtype=np.int64)
    np.minimum.at(best_core, rows[border_edges], cols[border_edges])
    border = best_core < n
    labels[border] = labels[best_core[border]]

    return _canonical_labels(labels, min_size)


def _canonical_labels(labels: NDArray[np.int64], min_size: int) -> NDArray[np.int64]:
    """Drop undersized clusters and renumber by first member index"""
    out = np.full_like(labels, NOISE)
    clustered = labels != NOISE
    if not np.any(clustered):
        return out

    ids, first_index, sizes = np.unique(labels[clustered], return_index=True, return_counts=True)
    first_member = np.flatnonzero(clustered)[first_index]
    keep = sizes >= min_size
    ranked = ids[keep][np.argsort(first_member[keep])]

    remap = {int(old): new for new, old in enumerate(ranked)}
    for old, new in remap.items():
        out[labels == old] = new
    return out


def cluster(
    grid: SemanticVoxelGrid,
    params: ClusterParams,
    sample_points: int = DEFAULT_SAMPLE_POINTS,
) -> List[ObjectInstance]:
    """
    Cluster same-class voxels of a grid into object instances

    Cell class is the argmax of the mean probabilities. Cells of excluded
    classes are never clustered; noise cells are discarded. Instances come out
    ordered by class id, then by cluster label.
    """
    if len(grid) == 0:
        return []

    classes = grid.cell_classes
    instances: List[ObjectInstance] = []

    for class_id in np.unique(classes):
        if int(class_id) in params.excluded_classes:
            continue
        members = np.flatnonzero(classes == class_id)
        centroids = grid.centroids[members]
        labels = dbscan(centroids, params.eps, params.core_threshold, params.min_pts)

        for label in range(int(labels.max()) + 1):
            cells = centroids[labels == label]
            instances.append(
                ObjectInstance(
                    class_id=int(class_id),
                    cells=cells,
                    centroid=cells.mean(axis=0),
                    sampled=sample_fixed(cells, sample_points),
                )
            )

    logger.debug(f"Clustered {len(grid)} cells into {len(instances)} instances")
    return instances


def farthest_point_order(points: NDArray, count: int) -> NDArray[np.int64]:
    """
    Indices of count distinct points picked by farthest-point sampling

    The point nearest the centroid seeds the distance field; each pick is the
    unselected point farthest from the seed and all earlier picks. Ties go to
    the lowest index. count must not exceed the number of points.
    """
    points = np.asarray(points, dtype=np.float64)
    offsets = points - points.mean(axis=0)
    seed = int(np.argmin(np.einsum("ij,ij->i", offsets, offsets)))

    diff = points - points[seed]
    nearest = np.einsum("ij,ij->i", diff, diff)
    selected = np.empty(count, dtype=np.int64)
    for k in range(count):
        pick = int(np.argmax(nearest))
        selected[k] = pick
        diff = points - points[pick]
        np.minimum(nearest, np.einsum("ij,ij->i", diff, diff), out=nearest)
        # picked points sit below every candidate distance
        nearest[pick] = -1.0
    return selected


def sample_fixed(points: NDArray, count: int = DEFAULT_SAMPLE_POINTS) -> NDArray[np.float64]:
    """
    Fixed-size point sample of an instance

    With at least count points: farthest-point sampling of size count.
    With fewer (p) points: all p points followed by the (count − p) points
    ranked farthest from the centroid, cycling through the ranking if needed.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        raise InvalidInputError("Cannot sample an empty instance")
    if count < 1:
        raise InvalidInputError("Sample size must be at least 1")

    available = points.shape[0]
    if available >= count:
        return points[farthest_point_order(points, count)]

    offsets = points - points.mean(axis=0)
    ranking = np.argsort(-np.einsum("ij,ij->i", offsets, offsets), kind="stable")
    padding = ranking[np.arange(count - available) % available]
    return np.concatenate([points, points[padding]], axis=0)
