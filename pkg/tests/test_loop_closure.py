import numpy as np
import pytest

from src.config import PipelineConfig
from src.errors import InvalidInputError
from src.models import ClassificationMode, IndexRecord, Pose
from src.services import (
    LoopClosureDetector,
    PlaceIndex,
    apply,
    consistency_score,
    pairwise_consistency,
    rerank_classify,
)
from src.services.loop_closure import ScoredCandidate
from tests.helpers import distinct_features, point_graph, random_pose


def test_single_pair_hinge_value():
    query = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    candidate = np.array([[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]])
    assert pairwise_consistency(query, candidate, d_t=1.0) == pytest.approx(0.75)


def test_rigid_pair_scores_every_pair(rng):
    for count in (3, 5, 8):
        points = rng.uniform(-20, 20, size=(count, 3))
        moved = apply(random_pose(rng), points)
        assert pairwise_consistency(points, moved) == pytest.approx(count * (count - 1) / 2, abs=1e-9)


def test_large_distance_changes_score_zero():
    query = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    candidate = query * 5.0
    assert pairwise_consistency(query, candidate, d_t=1.0) == 0.0


def test_consistency_is_monotone_under_removal(rng):
    points = rng.uniform(-10, 10, size=(10, 3))
    noisy = points + rng.normal(scale=0.3, size=points.shape)
    full = pairwise_consistency(points, noisy)
    for drop in range(10):
        keep = np.arange(10) != drop
        assert pairwise_consistency(points[keep], noisy[keep]) <= full


def test_pairwise_consistency_validation():
    assert pairwise_consistency(np.zeros((1, 3)), np.zeros((1, 3))) == 0.0
    with pytest.raises(InvalidInputError):
        pairwise_consistency(np.zeros((2, 3)), np.zeros((3, 3)))
    with pytest.raises(InvalidInputError):
        pairwise_consistency(np.zeros((2, 3)), np.zeros((2, 3)), d_t=0.0)


def test_consistency_score_of_rigid_copy(rng):
    centroids = rng.uniform(-15, 15, size=(5, 3))
    features = distinct_features(5)
    query = point_graph(centroids, features)
    candidate = point_graph(apply(random_pose(rng), centroids), features)
    assert consistency_score(query, candidate) == pytest.approx(10.0, abs=1e-9)


def test_consistency_score_normalized(rng):
    centroids = rng.uniform(-15, 15, size=(5, 3))
    features = distinct_features(5)
    config = PipelineConfig(consistency_normalize=True)
    score = consistency_score(point_graph(centroids, features), point_graph(centroids, features), config=config)
    assert score == pytest.approx(2.0, abs=1e-9)


def test_consistency_score_needs_three_matches(rng):
    centroids = rng.uniform(-15, 15, size=(2, 3))
    graph = point_graph(centroids, distinct_features(2))
    assert consistency_score(graph, graph) == 0.0


def _record(record_id, timestamp, graph, embedding):
    return IndexRecord(
        id=record_id,
        timestamp=timestamp,
        embedding=np.asarray(embedding, dtype=np.float64),
        graph=graph.with_embedding(np.asarray(embedding, dtype=np.float64)),
        world_pose=Pose.identity(),
    )


@pytest.fixture
def scene(rng):
    centroids = rng.uniform(-15, 15, size=(6, 3))
    features = distinct_features(6)
    query = point_graph(centroids, features).with_embedding(np.zeros(2))
    revisit = point_graph(apply(random_pose(rng), centroids), features)
    unrelated = point_graph(rng.uniform(-15, 15, size=(6, 3)), features)
    index = PlaceIndex([_record(1, 0.0, revisit, [1.0, 0.0]), _record(2, 1.0, unrelated, [0.5, 0.0])])
    return query, index


def test_rerank_prefers_consistent_candidate(scene):
    query, index = scene
    decision = rerank_classify(query, index, query_id=99, query_time=100.0, k=20, epsilon_c=5.0)
    assert decision.candidate_id == 1
    assert decision.is_revisit
    assert decision.consistency == pytest.approx(15.0, abs=1e-9)
    assert decision.ranked_ids == [1, 2]


def test_modes_from_one_scoring_pass(scene):
    query, index = scene
    decisions = LoopClosureDetector(index, PipelineConfig()).classify_all(99, query, 100.0)
    embedding = decisions[ClassificationMode.EMBEDDING]
    rerank = decisions[ClassificationMode.RERANK]
    consistency = decisions[ClassificationMode.CONSISTENCY]

    assert (embedding.candidate_id, embedding.score, embedding.is_revisit) == (2, -0.5, True)
    assert (rerank.candidate_id, rerank.score, rerank.is_revisit) == (1, -1.0, True)
    assert consistency.candidate_id == 1
    assert consistency.score == pytest.approx(15.0, abs=1e-9)


def test_decision_thresholds():
    detector = LoopClosureDetector(PlaceIndex(), PipelineConfig(epsilon_c=5.0))
    strong = detector._decide(0, [ScoredCandidate(7, 0.8, 12.0)], ClassificationMode.CONSISTENCY)
    assert strong.is_revisit and strong.candidate_id == 7

    weak = detector._decide(0, [ScoredCandidate(7, 0.8, 0.4)], ClassificationMode.CONSISTENCY)
    assert not weak.is_revisit
    assert weak.candidate_id == 7


def test_consistency_ties_keep_embedding_order():
    detector = LoopClosureDetector(PlaceIndex(), PipelineConfig())
    scored = [ScoredCandidate(3, 0.2, 4.0), ScoredCandidate(1, 0.6, 4.0)]
    assert detector._decide(0, scored, ClassificationMode.CONSISTENCY).candidate_id == 3


def test_no_candidates_gives_empty_decision(scene):
    query, index = scene
    decision = LoopClosureDetector(index).classify(99, query, query_time=10.0)
    assert decision.candidate_id is None
    assert not decision.is_revisit
    assert decision.score == float("-inf")


def test_query_needs_embedding(scene, rng):
    _, index = scene
    bare = point_graph(rng.uniform(size=(3, 3)), distinct_features(3))
    with pytest.raises(InvalidInputError):
        LoopClosureDetector(index).classify(99, bare, 100.0)
