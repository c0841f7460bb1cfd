"""
Synthetic scene and world models
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .geometry import Pose
from .submap import Submap


# car, truck, building, fence, vegetation, trunk, pole, traffic-sign
DEFAULT_PALETTE: Tuple[int, ...] = (1, 4, 13, 14, 15, 16, 18, 19)


class SceneSpec(BaseModel):
    """Parameters of one synthetic query/candidate pair"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, description="Seed of every random draw")
    object_count: int = Field(default=20, ge=1, description="Objects K in submap A")
    palette: Tuple[int, ...] = Field(default=DEFAULT_PALETTE, description="Class ids objects are drawn from")
    num_classes: int = Field(default=20, ge=2, le=32, description="Width of the probability rows")
    noise_sigma: float = Field(default=0.0, ge=0, description="Gaussian point noise in B, meters")
    dropout: float = Field(default=0.0, ge=0, lt=1, description="Probability that an object is missing from B")
    max_rotation_deg: float = Field(default=180.0, ge=0, le=180, description="Rotation magnitude bound")
    max_translation_m: float = Field(default=10.0, ge=0, description="Translation magnitude bound")
    yaw_only: bool = Field(default=True, description="Rotate about the vertical axis only")
    extent_m: float = Field(default=20.0, gt=0, description="Half-width of the square objects are placed in")

    @field_validator("palette")
    @classmethod
    def validate_palette(cls, v):
        """Palette must be non-empty"""
        if not v:
            raise ValueError("palette must contain at least one class")
        return tuple(int(c) for c in v)

    @model_validator(mode="after")
    def validate_palette_width(self) -> "SceneSpec":
        """Palette ids must fit the probability rows"""
        if max(self.palette) >= self.num_classes or min(self.palette) < 0:
            raise ValueError(f"palette ids must lie in [0, {self.num_classes})")
        return self


class WorldSpec(BaseModel):
    """Parameters of a synthetic trajectory with revisits"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, description="Seed of every random draw")
    submap_count: int = Field(default=200, ge=1, description="Submaps along the trajectory")
    step_m: float = Field(default=25.0, gt=0, description="Distance between consecutive places")
    scan_period_s: float = Field(default=2.5, gt=0, description="Time between consecutive submaps")
    revisit_fraction: float = Field(default=0.2, ge=0, le=1, description="Share of late submaps that revisit")
    revisit_offset_m: Tuple[float, float] = Field(default=(0.0, 2.0), description="Revisit offset range")
    reverse_fraction: float = Field(default=0.5, ge=0, le=1, description="Share of revisits with reversed heading")
    min_revisit_gap_s: float = Field(default=30.0, ge=0, description="Minimum age of a revisited place")
    object_count: int = Field(default=20, ge=1, description="Objects per place")
    palette: Tuple[int, ...] = Field(default=DEFAULT_PALETTE, description="Class ids objects are drawn from")
    num_classes: int = Field(default=20, ge=2, le=32, description="Width of the probability rows")
    noise_sigma: float = Field(default=0.02, ge=0, description="Gaussian point noise on revisits")
    dropout: float = Field(default=0.1, ge=0, lt=1, description="Object dropout on revisits")
    extent_m: float = Field(default=15.0, gt=0, description="Half-width of the square objects are placed in")

    @field_validator("revisit_offset_m")
    @classmethod
    def validate_offset(cls, v):
        """Offset range must be ordered and non-negative"""
        low, high = float(v[0]), float(v[1])
        if not 0.0 <= low <= high:
            raise ValueError("revisit_offset_m must satisfy 0 <= min <= max")
        return low, high

    @field_validator("palette")
    @classmethod
    def validate_palette(cls, v):
        """Palette must be non-empty"""
        if not v:
            raise ValueError("palette must contain at least one class")
        return tuple(int(c) for c in v)


@dataclass(frozen=True)
class SyntheticPair:
    """
    Synthetic query/candidate pair with ground truth

    gt maps B coordinates into A's frame. correspondences lists
    (object index in A, object index in B) for the objects that survived
    dropout; centers_* are the exact primitive centers in each frame.
    """

    a: Submap
    b: Submap
    gt: Pose
    correspondences: Tuple[Tuple[int, int], ...]
    centers_a: NDArray[np.float64]
    centers_b: NDArray[np.float64]
    classes_a: NDArray[np.int64]


@dataclass(frozen=True)
class WorldEntry:
    """One submap of a synthetic world with its ground-truth pose and loop partner"""

    submap: Submap
    pose: Pose
    timestamp: float
    revisit_of: Optional[int] = None


@dataclass(frozen=True)
class SyntheticWorld:
    spec: WorldSpec
    entries: Tuple[WorldEntry, ...]

    @property
    def revisits(self) -> List[Tuple[int, int]]:
        """(query submap id, earlier submap id) for every annotated revisit"""
        return [(e.submap.id, e.revisit_of) for e in self.entries if e.revisit_of is not None]

    def __len__(self) -> int:
        return len(self.entries)
