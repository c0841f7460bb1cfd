"""
Training objective models
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field

from ..errors import InvalidInputError


def _vector(name: str, values: NDArray) -> NDArray[np.float64]:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return values


@dataclass(frozen=True)
class TripletSpec:
    """Anchor, positive and negative embeddings with a margin"""

    anchor: NDArray[np.float64]
    positive: NDArray[np.float64]
    negative: NDArray[np.float64]
    margin: float = 1.0
    anchor_index: Optional[int] = None
    positive_index: Optional[int] = None
    negative_index: Optional[int] = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.margin) and self.margin >= 0):
            raise InvalidInputError(f"Triplet margin must be >= 0, got {self.margin}")
        anchor = _vector("anchor", self.anchor)
        positive = _vector("positive", self.positive)
        negative = _vector("negative", self.negative)
        if not anchor.shape == positive.shape == negative.shape:
            raise InvalidInputError("Triplet embeddings must share one dimension")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "positive", positive)
        object.__setattr__(self, "negative", negative)


@dataclass(frozen=True)
class BatchSample:
    """Embedding of one submap and its ground-truth world position"""

    embedding: NDArray[np.float64]
    position: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "embedding", _vector("embedding", self.embedding))
        position = _vector("position", self.position)
        if position.shape != (3,):
            raise InvalidInputError("Sample position must be a 3-vector")
        object.__setattr__(self, "position", position)


class BatchObjective(BaseModel):
    """Combined objective evaluated over one batch"""

    triplet_loss: float = Field(ge=0, description="Mean loss over mined triplets")
    score_loss: float = Field(ge=0, description="Mean BCE of pair scores against proximity labels")
    total_loss: float = Field(ge=0, description="triplet_loss + score_loss")
    triplet_count: int = Field(ge=0, description="Number of mined triplets")
    pair_count: int = Field(ge=0, description="Number of scored pairs")
