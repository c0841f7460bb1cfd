"""
Registration models
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import InvalidInputError
from .geometry import Pose


MIN_INLIERS = 3


class RegistrationStage(str, Enum):
    COARSE = "coarse"
    REFINED = "refined"


class Correspondence(BaseModel):
    """Mutual best descriptor match between a query node and a candidate node"""

    model_config = ConfigDict(frozen=True)

    query_node: int = Field(ge=0, description="Node index in the query graph")
    candidate_node: int = Field(ge=0, description="Node index in the candidate graph")
    descriptor_distance: float = Field(ge=0, description="L2 distance between the node features")


@dataclass(frozen=True)
class TransformEstimate:
    """
    Rigid transform hypothesis mapping candidate coordinates into the query frame

    degraded marks an ICP refinement that could not associate any points and
    fell back to the coarse transform.
    """

    transform: Pose
    inliers: Tuple[Correspondence, ...]
    rmse: float
    stage: RegistrationStage = RegistrationStage.COARSE
    degraded: bool = False
    iterations: int = 0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.rmse) and self.rmse >= 0):
            raise InvalidInputError(f"rmse must be finite and non-negative, got {self.rmse}")
        object.__setattr__(self, "inliers", tuple(self.inliers))

    @property
    def is_valid(self) -> bool:
        return len(self.inliers) >= MIN_INLIERS


@dataclass(frozen=True)
class RegistrationResult:
    """Coarse and refined estimates of one query/candidate pair"""

    query_id: int
    candidate_id: int
    coarse: TransformEstimate
    refined: TransformEstimate
    correspondences: Tuple[Correspondence, ...] = field(default_factory=tuple)


class RegistrationEvaluation(BaseModel):
    """Error of one estimate against ground truth"""

    rre: float = Field(ge=0, description="Relative rotation error in degrees")
    rte: float = Field(ge=0, description="Relative translation error in meters")
    success: bool = Field(description="rre <= rre_max and rte <= rte_max")
