"""
Submap construction

Consecutive labeled scans are fused into the frame of the middle scan and
discretized into voxels whose semantic probability is the mean of the member
points' class probabilities.
"""

import logging
from typing import List, Sequence

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError
from ..models import LabeledScan, SemanticVoxelGrid, Submap
from .geometry import apply, relative


logger = logging.getLogger(__name__)

DEFAULT_VOXEL_SIZE = 0.10
DEFAULT_MAX_SPAN = 20.0


def _window_length(scans: Sequence[LabeledScan], max_span: float) -> int:
    """Number of leading scans whose distance to the first scan stays within max_span"""
    if max_span <= 0.0:
        return 1
    first = scans[0].pose.translation
    count = 1
    for scan in scans[1:]:
        if np.linalg.norm(scan.pose.translation - first) > max_span:
            break
        count += 1
    return count


def _check_sequence(scans: Sequence[LabeledScan]) -> None:
    if not scans:
        raise InvalidInputError("Cannot build a submap from an empty scan list")
    timestamps = np.array([scan.timestamp for scan in scans], dtype=np.float64)
    if np.any(np.diff(timestamps) <= 0.0):
        raise InvalidInputError("Scan timestamps must be strictly increasing")
    classes = {scan.num_classes for scan in scans}
    if len(classes) != 1:
        raise InvalidInputError(f"Scans disagree on the number of classes: {sorted(classes)}")


def accumulate(
    scans: Sequence[LabeledScan],
    max_span: float = DEFAULT_MAX_SPAN,
    voxel_size: float = DEFAULT_VOXEL_SIZE,
    submap_id: int = 0,
) -> Submap:
    """
    Fuse consecutive scans into one voxelized submap

    Scans are taken from the first one while the straight-line distance between
    scan N and scan 1 is at most max_span (inclusive). Points are expressed in
    the frame of the middle scan, index (N-1)//2, which also provides the
    submap origin and timestamp.
    """
    _check_sequence(scans)
    count = _window_length(scans, max_span)
    window = scans[:count]
    middle = window[(count - 1) // 2]

    points = []
    for scan in window:
        to_middle = relative(middle.pose, scan.pose)
        points.append(apply(to_middle, scan.points))

    grid = voxelize(
        np.concatenate(points, axis=0),
        np.concatenate([scan.class_probs for scan in window], axis=0),
        voxel_size,
    )
    logger.debug(
        f"Submap {submap_id}: {count} scans, {grid.keys.shape[0]} cells, "
        f"origin t={middle.timestamp:.3f}"
    )
    return Submap(id=submap_id, origin=middle.pose, timestamp=middle.timestamp, grid=grid)


def build_submaps(
    scans: Sequence[LabeledScan],
    max_span: float = DEFAULT_MAX_SPAN,
    voxel_size: float = DEFAULT_VOXEL_SIZE,
    start_id: int = 0,
) -> List[Submap]:
    """Split a scan sequence into consecutive, non-overlapping submaps"""
    _check_sequence(scans)
    submaps: List[Submap] = []
    start = 0
    while start < len(scans):
        remaining = scans[start:]
        count = _window_length(remaining, max_span)
        submaps.append(
            accumulate(remaining[:count], max_span, voxel_size, submap_id=start_id + len(submaps))
        )
        start += count

    logger.info(f"Built {len(submaps)} submaps from {len(scans)} scans")
    return submaps


def voxelize(points: NDArray, class_probs: NDArray, voxel_size: float = DEFAULT_VOXEL_SIZE) -> SemanticVoxelGrid:
    """
    Discretize labeled points into voxels of edge voxel_size

    Voxel key = floor(coordinate / voxel_size). Per cell: arithmetic mean of
    member probability rows, mean of member points and member count. Members
    are summed in a canonical order so the result does not depend on input
    point order.
    """
    if not voxel_size > 0:
        raise InvalidInputError("voxel_size must be positive")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    probs = np.asarray(class_probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != points.shape[0]:
        raise InvalidInputError("class_probs must have one row per point")
    if not np.all(np.isfinite(points)):
        raise InvalidInputError("Cannot voxelize non-finite coordinates")

    num_classes = probs.shape[1]
    if points.shape[0] == 0:
        return SemanticVoxelGrid(
            voxel_size=voxel_size,
            keys=np.zeros((0, 3), dtype=np.int64),
            probs=np.zeros((0, num_classes)),
            counts=np.zeros(0, dtype=np.int64),
            centroids=np.zeros((0, 3)),
        )

    keys = np.floor(points / voxel_size).astype(np.int64)

    # lexsort: last key is primary -> voxel key, then coordinates, then probabilities
    sort_keys = [probs[:, c] for c in range(num_classes - 1, -1, -1)]
    sort_keys += [points[:, 2], points[:, 1], points[:, 0], keys[:, 2], keys[:, 1], keys[:, 0]]
    order = np.lexsort(sort_keys)

    keys = keys[order]
    points = points[order]
    probs = probs[order]

    boundary = np.ones(keys.shape[0], dtype=bool)
    boundary[1:] = np.any(keys[1:] != keys[:-1], axis=1)
    starts = np.flatnonzero(boundary)
    counts = np.diff(np.append(starts, keys.shape[0]))

    prob_sums = np.add.reduceat(probs, starts, axis=0)
    point_sums = np.add.reduceat(points, starts, axis=0)

    return SemanticVoxelGrid(
        voxel_size=voxel_size,
        keys=keys[starts],
        probs=prob_sums / counts[:, None],
        counts=counts.astype(np.int64),
        centroids=point_sums / counts[:, None],
    )
