"""
Submap data models: labeled scans, semantic voxel grids and submaps
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError
from .geometry import Pose


PROBABILITY_SUM_TOL = 1e-4


def _check_probability_rows(probs: NDArray, what: str) -> None:
    if probs.size and not np.all(np.abs(probs.sum(axis=1) - 1.0) <= PROBABILITY_SUM_TOL):
        raise InvalidInputError(f"{what} probability rows must sum to 1")


@dataclass(frozen=True)
class LabeledScan:
    """One LiDAR scan in its sensor frame with per-point class probabilities"""

    points: NDArray[np.float64]
    class_probs: NDArray[np.float64]
    timestamp: float
    pose: Pose

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        probs = np.asarray(self.class_probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != points.shape[0]:
            raise InvalidInputError(
                f"class_probs must have one row per point ({points.shape[0]}), got {probs.shape}"
            )
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("Scan contains non-finite coordinates")
        _check_probability_rows(probs, "Scan")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "class_probs", probs)

    @property
    def num_classes(self) -> int:
        return int(self.class_probs.shape[1])


@dataclass(frozen=True)
class SemanticVoxelGrid:
    """
    Voxelized semantic cloud

    Cells are stored as parallel arrays sorted by voxel key (lexicographic):
    keys (n×3 int64), mean class probabilities (n×C), point counts (n) and
    centroids of the contained points (n×3).
    """

    voxel_size: float
    keys: NDArray[np.int64]
    probs: NDArray[np.float64]
    counts: NDArray[np.int64]
    centroids: NDArray[np.float64]

    def __post_init__(self) -> None:
        if not self.voxel_size > 0:
            raise InvalidInputError("voxel_size must be positive")
        n = self.keys.shape[0]
        if not (self.probs.shape[0] == self.counts.shape[0] == self.centroids.shape[0] == n):
            raise InvalidInputError("Voxel grid arrays must have matching lengths")
        if n and int(self.counts.min()) < 1:
            raise InvalidInputError("Every voxel cell must hold at least one point")
        _check_probability_rows(self.probs, "Voxel")

    def __len__(self) -> int:
        return int(self.keys.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.probs.shape[1]) if self.probs.ndim == 2 else 0

    @property
    def cell_classes(self) -> NDArray[np.int64]:
        """Semantic class per cell: argmax of the mean probabilities (lowest id on ties)"""
        if len(self) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.argmax(self.probs, axis=1).astype(np.int64)


@dataclass(frozen=True)
class Submap:
    """Voxelized submap expressed in the frame of its middle scan"""

    id: int
    origin: Pose
    timestamp: float
    grid: SemanticVoxelGrid

    @property
    def position(self) -> NDArray[np.float64]:
        """World position of the submap origin"""
        return self.origin.translation
