"""
Loop-closure detection

Top-k embedding candidates are re-ranked by the geometric consistency of their
matched objects. A query is a revisit according to one of three modes:
embedding distance of the nearest candidate, embedding distance of the
re-ranked best candidate, or the consistency score of the re-ranked best
candidate.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import pdist

from ..config import PipelineConfig
from ..errors import InvalidInputError
from ..models import ClassificationMode, RevisitDecision, SceneGraph
from .place_index import PlaceIndex
from .registration import GraphRegistrar, InsufficientDataError


logger = logging.getLogger(__name__)

DEFAULT_D_T = 1.0


def pairwise_consistency(query_points: NDArray, candidate_points: NDArray, d_t: float = DEFAULT_D_T) -> float:
    """
    Sum over unordered pairs of matched landmarks of max(1 − (d1 − d2)²/d_t², 0)

    Row i of both arrays is one matched pair; d1 and d2 are the intra-graph
    distances between two such pairs on the query and candidate side.
    """
    if not d_t > 0:
        raise InvalidInputError(f"d_t must be positive, got {d_t}")
    query_points = np.asarray(query_points, dtype=np.float64).reshape(-1, 3)
    candidate_points = np.asarray(candidate_points, dtype=np.float64).reshape(-1, 3)
    if query_points.shape != candidate_points.shape:
        raise InvalidInputError("Matched point arrays must have the same shape")
    if query_points.shape[0] < 2:
        return 0.0
    d1 = pdist(query_points)
    d2 = pdist(candidate_points)
    return float(np.maximum(1.0 - (d1 - d2) ** 2 / (d_t * d_t), 0.0).sum())


def consistency_score(
    query_graph: SceneGraph,
    candidate_graph: SceneGraph,
    d_t: float = DEFAULT_D_T,
    config: Optional[PipelineConfig] = None,
) -> float:
    """
    Geometric consistency C of a candidate

    Mutual matches go through RANSAC over the object centroids (no ICP); C is
    the pairwise agreement of the RANSAC inliers. Fewer than 3 matches give 0.
    With consistency_normalize set, C is divided by the inlier count.
    """
    config = config or PipelineConfig()
    try:
        estimate = GraphRegistrar(config, name="consistency").coarse(query_graph, candidate_graph)
    except InsufficientDataError:
        return 0.0

    inliers = estimate.inliers
    score = pairwise_consistency(
        query_graph.centroids[[c.query_node for c in inliers]],
        candidate_graph.centroids[[c.candidate_node for c in inliers]],
        d_t,
    )
    if config.consistency_normalize and inliers:
        score /= len(inliers)
    return score


@dataclass(frozen=True)
class ScoredCandidate:
    record_id: int
    embedding_distance: float
    consistency: float


class LoopClosureDetector:
    """Queries a PlaceIndex and classifies revisits with configured thresholds"""

    def __init__(self, index: PlaceIndex, config: Optional[PipelineConfig] = None, name: str = "default"):
        self.index = index
        self.config = config or PipelineConfig()
        self.logger = logging.getLogger(f"{__name__}.{name}")

    def score_candidates(
        self, graph: SceneGraph, query_time: float, query_id: Optional[int] = None
    ) -> List[ScoredCandidate]:
        """Top-k candidates by embedding distance, each with its consistency"""
        if graph.embedding is None:
            raise InvalidInputError("Query graph has no global embedding")
        candidates = self.index.query_topk(
            graph.embedding,
            query_time,
            k=self.config.top_k,
            exclusion=self.config.exclusion_s,
            exclude_id=query_id,
        )
        return [
            ScoredCandidate(
                record_id=c.record.id,
                embedding_distance=c.distance,
                consistency=consistency_score(graph, c.record.graph, self.config.d_t, self.config),
            )
            for c in candidates
        ]

    def _decide(
        self, query_id: int, scored: List[ScoredCandidate], mode: ClassificationMode
    ) -> RevisitDecision:
        if not scored:
            return RevisitDecision(query_id=query_id, mode=mode)

        if mode == ClassificationMode.EMBEDDING:
            ranked = scored
        else:
            # stable sort keeps ascending embedding distance among equal C
            ranked = sorted(scored, key=lambda s: -s.consistency)
        best = ranked[0]

        if mode == ClassificationMode.CONSISTENCY:
            score = best.consistency
            is_revisit = best.consistency > self.config.epsilon_c
        else:
            score = -best.embedding_distance
            is_revisit = best.embedding_distance <= self.config.delta

        return RevisitDecision(
            query_id=query_id,
            candidate_id=best.record_id,
            consistency=best.consistency,
            embedding_distance=best.embedding_distance,
            is_revisit=is_revisit,
            mode=mode,
            score=score,
            ranked_ids=[s.record_id for s in ranked],
        )

    def classify_all(
        self, query_id: int, graph: SceneGraph, query_time: float
    ) -> Dict[ClassificationMode, RevisitDecision]:
        """Decisions of every mode from one scoring pass"""
        scored = self.score_candidates(graph, query_time, query_id)
        decisions = {mode: self._decide(query_id, scored, mode) for mode in ClassificationMode}
        chosen = decisions[ClassificationMode(self.config.classification)]
        self.logger.debug(
            f"Query {query_id}: {len(scored)} candidates, best {chosen.candidate_id} "
            f"(C={chosen.consistency:.2f}, D={chosen.embedding_distance:.4f}, revisit={chosen.is_revisit})"
        )
        return decisions

    def classify(
        self,
        query_id: int,
        graph: SceneGraph,
        query_time: float,
        mode: Optional[ClassificationMode] = None,
    ) -> RevisitDecision:
        """Decision in the given mode, or the configured one"""
        mode = ClassificationMode(mode or self.config.classification)
        return self._decide(query_id, self.score_candidates(graph, query_time, query_id), mode)


def rerank_classify(
    query_graph: SceneGraph,
    index: PlaceIndex,
    query_id: int,
    query_time: float,
    k: int = 20,
    epsilon_c: float = 6.0,
    config: Optional[PipelineConfig] = None,
) -> RevisitDecision:
    """
    Re-rank the top-k candidates by consistency and classify the best one

    The best candidate maximizes C (ties by smallest embedding distance); the
    query is a revisit iff C > epsilon_c.
    """
    config = (config or PipelineConfig()).with_overrides({"top_k": k, "epsilon_c": epsilon_c})
    detector = LoopClosureDetector(index, config)
    return detector.classify(query_id, query_graph, query_time, ClassificationMode.CONSISTENCY)
