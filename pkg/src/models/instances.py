"""
Object instance models: clustering parameters and clustered objects
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Dict, FrozenSet, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import InvalidInputError


# Training-label ids (20-class SemanticKITTI map) that never form closed objects:
# unlabeled/outlier/other-object, road, sidewalk, other-ground, terrain
DEFAULT_EXCLUDED_CLASSES: FrozenSet[int] = frozenset({0, 9, 11, 12, 17})


class ClusterParams(BaseModel):
    """DBSCAN parameters for instance clustering"""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(default=0.2, gt=0, description="Neighbourhood radius in meters")
    min_pts: int = Field(default=100, ge=1, description="Minimum number of cells per instance")
    min_samples: Optional[int] = Field(
        default=5,
        ge=1,
        description="Neighbours (self included) required for a core cell; min_pts when unset",
    )
    excluded_classes: FrozenSet[int] = Field(
        default=DEFAULT_EXCLUDED_CLASSES,
        description="Class ids that are never clustered",
    )

    PROFILES: ClassVar[Dict[str, Tuple[float, int, Optional[int]]]] = {
        "voxel": (0.2, 100, 5),
        "kitti": (0.05, 800, None),
        "kitti_vegetation": (0.1, 300, None),
    }

    @field_validator("excluded_classes", mode="before")
    @classmethod
    def validate_excluded_classes(cls, v):
        """Accept any iterable of class ids"""
        return frozenset(int(c) for c in v)

    @property
    def core_threshold(self) -> int:
        """Neighbour count that makes a cell a core cell"""
        return self.min_samples if self.min_samples is not None else self.min_pts

    @classmethod
    def from_profile(cls, name: str, excluded_classes=DEFAULT_EXCLUDED_CLASSES) -> "ClusterParams":
        """Named parameter set ("voxel", "kitti", "kitti_vegetation")"""
        if name not in cls.PROFILES:
            raise InvalidInputError(f"Unknown cluster profile '{name}'; choose from {sorted(cls.PROFILES)}")
        eps, min_pts, min_samples = cls.PROFILES[name]
        return cls(eps=eps, min_pts=min_pts, min_samples=min_samples, excluded_classes=excluded_classes)


@dataclass(frozen=True)
class ObjectInstance:
    """One clustered object: its voxel centroids, keypoint, class and fixed-size sample"""

    class_id: int
    cells: NDArray[np.float64]
    centroid: NDArray[np.float64]
    sampled: NDArray[np.float64]

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.float64).reshape(-1, 3)
        if cells.shape[0] == 0:
            raise InvalidInputError("An object instance needs at least one cell")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=np.float64).reshape(3))
        object.__setattr__(self, "sampled", np.asarray(self.sampled, dtype=np.float64).reshape(-1, 3))

    @property
    def size(self) -> int:
        return int(self.cells.shape[0])
