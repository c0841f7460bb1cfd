"""
Retrieval database and loop-closure decision models
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, field_validator, model_validator

from ..errors import InvalidInputError
from .geometry import Pose
from .graph import SceneGraph


class ClassificationMode(str, Enum):
    """How a query is declared a revisit"""
    EMBEDDING = "embedding"
    RERANK = "rerank"
    CONSISTENCY = "consistency"


@dataclass(frozen=True)
class IndexRecord:
    """One previously seen submap in the retrieval database"""

    id: int
    timestamp: float
    embedding: NDArray[np.float64]
    graph: SceneGraph
    world_pose: Pose

    def __post_init__(self) -> None:
        embedding = np.asarray(self.embedding, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(embedding)):
            raise InvalidInputError(f"Record {self.id} has a non-finite embedding")
        if not np.isfinite(self.timestamp):
            raise InvalidInputError(f"Record {self.id} has a non-finite timestamp")
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "embedding", embedding)

    @property
    def position(self) -> NDArray[np.float64]:
        return self.world_pose.translation


@dataclass(frozen=True)
class RankedCandidate:
    """A database record with its embedding distance to the query"""

    record: IndexRecord
    distance: float


class RevisitDecision(BaseModel):
    """Outcome of loop-closure classification for one query"""

    query_id: int = Field(description="Query submap id")
    candidate_id: Optional[int] = Field(default=None, description="Best revisit candidate")
    consistency: float = Field(default=0.0, ge=0, description="Geometric consistency C of the candidate")
    embedding_distance: float = Field(default=0.0, ge=0, description="Embedding distance D of the candidate")
    is_revisit: bool = Field(default=False, description="Whether the query is declared a revisit")
    mode: ClassificationMode = Field(default=ClassificationMode.CONSISTENCY, description="Classification mode")
    score: float = Field(
        default=float("-inf"),
        description="Value swept for precision/recall: C for consistency, -D otherwise",
    )
    ranked_ids: List[int] = Field(default_factory=list, description="Candidate ids in ranked order")

    @field_validator("score", mode="before")
    @classmethod
    def validate_score(cls, v):
        """A missing score (serialized -inf) is -inf"""
        return float("-inf") if v is None else v

    @model_validator(mode="after")
    def validate_candidate(self) -> "RevisitDecision":
        """A revisit needs a candidate"""
        if self.is_revisit and self.candidate_id is None:
            raise ValueError("is_revisit requires a candidate")
        return self
